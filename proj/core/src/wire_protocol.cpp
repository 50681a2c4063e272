#include "p2codec/wire_protocol.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>

namespace p2codec::wire {

namespace {

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void F32(float v) { U32(std::bit_cast<uint32_t>(v)); }
  void Bytes(std::span<const uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void String(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t U8() { return Need(1)[0]; }
  uint32_t U32() {
    auto b = Need(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  uint64_t U64() {
    auto b = Need(8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }
  float F32() { return std::bit_cast<float>(U32()); }
  std::span<const uint8_t> Bytes(std::size_t n) { return Need(n); }
  std::string String() {
    auto b = Need(U32());
    return std::string(b.begin(), b.end());
  }
  void ExpectEnd() const {
    if (pos_ != in_.size()) throw CodecError(ErrorKind::kCorruptProviderOutput, "trailing bytes in wire message");
  }

 private:
  std::span<const uint8_t> Need(std::size_t n) {
    if (in_.size() - pos_ < n) throw CodecError(ErrorKind::kCorruptProviderOutput, "truncated wire message");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const uint8_t> in_;
  std::size_t pos_ = 0;
};

struct Encoder {
  Writer& w;

  void operator()(const InitRequest& m) {
    w.U8(static_cast<uint8_t>(MessageType::kInit));
    w.U8(m.version);
    w.U8(static_cast<uint8_t>(m.mode));
    w.U8(m.expects_deterministic ? 1 : 0);
    w.U64(m.map_fingerprint);
    w.String(m.prompt_text);
  }
  void operator()(const InitResponse& m) {
    w.U8(static_cast<uint8_t>(MessageType::kInitOk));
    w.U32(m.vocab_size);
    w.U32(m.context_window);
    for (uint32_t id : m.digital_token_ids) w.U32(id);
    w.U64(m.model_fingerprint);
    w.U32(m.prompt_tokens);
    w.U8(m.deterministic ? 1 : 0);
  }
  void operator()(const PredictRequest& m) {
    w.U8(static_cast<uint8_t>(MessageType::kPredict));
    w.U32(static_cast<uint32_t>(m.items.size()));
    for (const auto& item : m.items) {
      w.U64(item.session_id);
      w.U32(static_cast<uint32_t>(item.new_symbols.size()));
      w.Bytes(item.new_symbols);
    }
  }
  void operator()(const PredictResponse& m) {
    w.U8(static_cast<uint8_t>(MessageType::kPredictOk));
    w.U32(static_cast<uint32_t>(m.logits.size()));
    for (const auto& row : m.logits) {
      for (float v : row) w.F32(v);
    }
  }
  void operator()(const ResetRequest& m) {
    w.U8(static_cast<uint8_t>(MessageType::kReset));
    w.U64(m.session_id);
  }
  void operator()(const ResetResponse& m) {
    w.U8(static_cast<uint8_t>(MessageType::kResetOk));
    w.U64(m.session_id);
  }
  void operator()(const ErrorResponse& m) {
    w.U8(static_cast<uint8_t>(MessageType::kError));
    w.U8(static_cast<uint8_t>(m.kind));
    w.String(m.message);
  }
};

[[noreturn]] void ThrowErrno(const std::string& what) {
  throw CodecError(ErrorKind::kProviderUnavailable, what + ": " + std::strerror(errno));
}

}  // namespace

std::vector<uint8_t> EncodeMessage(const Message& message) {
  Writer w;
  std::visit(Encoder{w}, message);
  return w.Take();
}

Message DecodeMessage(std::span<const uint8_t> payload) {
  Reader r(payload);
  const auto type = static_cast<MessageType>(r.U8());
  Message out;
  switch (type) {
    case MessageType::kInit: {
      InitRequest m;
      m.version = r.U8();
      const auto mode = OrderingModeFromTag(r.U8());
      if (!mode) throw CodecError(ErrorKind::kCorruptProviderOutput, "unknown ordering mode tag");
      m.mode = *mode;
      m.expects_deterministic = r.U8() != 0;
      m.map_fingerprint = r.U64();
      m.prompt_text = r.String();
      out = std::move(m);
      break;
    }
    case MessageType::kInitOk: {
      InitResponse m;
      m.vocab_size = r.U32();
      m.context_window = r.U32();
      for (auto& id : m.digital_token_ids) id = r.U32();
      m.model_fingerprint = r.U64();
      m.prompt_tokens = r.U32();
      m.deterministic = r.U8() != 0;
      out = m;
      break;
    }
    case MessageType::kPredict: {
      PredictRequest m;
      const uint32_t count = r.U32();
      for (uint32_t i = 0; i < count; ++i) {
        PredictItem item;
        item.session_id = r.U64();
        auto bytes = r.Bytes(r.U32());
        item.new_symbols.assign(bytes.begin(), bytes.end());
        m.items.push_back(std::move(item));
      }
      out = std::move(m);
      break;
    }
    case MessageType::kPredictOk: {
      PredictResponse m;
      const uint32_t count = r.U32();
      if (std::size_t{count} * kLogitPayloadBytes > payload.size()) {
        throw CodecError(ErrorKind::kCorruptProviderOutput, "truncated logits payload");
      }
      m.logits.resize(count);
      for (auto& row : m.logits) {
        for (float& v : row) v = r.F32();
      }
      out = std::move(m);
      break;
    }
    case MessageType::kReset: out = ResetRequest{r.U64()}; break;
    case MessageType::kResetOk: out = ResetResponse{r.U64()}; break;
    case MessageType::kError: {
      ErrorResponse m;
      const uint8_t kind = r.U8();
      m.kind = kind <= static_cast<uint8_t>(ErrorKind::kHarnessFailure) ? static_cast<ErrorKind>(kind)
                                                                         : ErrorKind::kProviderUnavailable;
      m.message = r.String();
      out = std::move(m);
      break;
    }
    default:
      throw CodecError(ErrorKind::kCorruptProviderOutput,
                       "unknown wire message type " + std::to_string(static_cast<int>(type)));
  }
  r.ExpectEnd();
  return out;
}

void WriteFrame(Transport& transport, std::span<const uint8_t> payload) {
  if (payload.size() > kMaxFrameBytes) throw CodecError(ErrorKind::kConfig, "wire frame too large");
  std::vector<uint8_t> frame(4 + payload.size());
  const auto n = static_cast<uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) frame[i] = static_cast<uint8_t>(n >> (8 * i));
  std::copy(payload.begin(), payload.end(), frame.begin() + 4);
  transport.WriteAll(frame);
}

bool ReadFrame(Transport& transport, std::vector<uint8_t>& payload) {
  std::array<uint8_t, 4> len{};
  if (!transport.ReadExact(len)) return false;
  const uint32_t n = uint32_t{len[0]} | uint32_t{len[1]} << 8 | uint32_t{len[2]} << 16 | uint32_t{len[3]} << 24;
  if (n > kMaxFrameBytes) throw CodecError(ErrorKind::kCorruptProviderOutput, "wire frame length too large");
  payload.resize(n);
  if (n > 0 && !transport.ReadExact(payload)) {
    throw CodecError(ErrorKind::kProviderUnavailable, "connection closed mid-frame");
  }
  return true;
}

void SendMessage(Transport& transport, const Message& message) { WriteFrame(transport, EncodeMessage(message)); }

Message ReceiveMessage(Transport& transport) {
  std::vector<uint8_t> payload;
  if (!ReadFrame(transport, payload)) throw CodecError(ErrorKind::kProviderUnavailable, "connection closed");
  return DecodeMessage(payload);
}

FdTransport::FdTransport(int read_fd, int write_fd, int child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid) {}

FdTransport::~FdTransport() {
  if (write_fd_ >= 0) ::close(write_fd_);
  if (read_fd_ >= 0 && read_fd_ != write_fd_) ::close(read_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
  }
}

void FdTransport::WriteAll(std::span<const uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(write_fd_, bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      const ssize_t m = ::write(write_fd_, bytes.data() + done, bytes.size() - done);
      if (m < 0) {
        if (errno == EINTR) continue;
        ThrowErrno("write to provider failed");
      }
      done += static_cast<std::size_t>(m);
      continue;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("send to provider failed");
    }
    done += static_cast<std::size_t>(n);
  }
}

bool FdTransport::ReadExact(std::span<uint8_t> bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::read(read_fd_, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ThrowErrno("read from provider failed");
    }
    if (n == 0) {
      if (done == 0) return false;
      throw CodecError(ErrorKind::kProviderUnavailable, "short read from provider");
    }
    done += static_cast<std::size_t>(n);
  }
  return true;
}

std::unique_ptr<Transport> ConnectTcp(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos) throw CodecError(ErrorKind::kConfig, "remote address must be host:port");
  const std::string host = address.substr(0, colon);
  const std::string port = address.substr(colon + 1);

  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (const int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw CodecError(ErrorKind::kProviderUnavailable, "cannot resolve " + address + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, ::freeaddrinfo);
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return std::make_unique<FdTransport>(fd, fd);
    }
    ::close(fd);
  }
  ThrowErrno("cannot connect to " + address);
}

std::unique_ptr<Transport> SpawnProcess(const std::string& command) {
  // A socketpair rather than pipes: send() with MSG_NOSIGNAL turns a dead
  // child into an error instead of SIGPIPE.
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) ThrowErrno("socketpair");
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    ThrowErrno("fork");
  }
  if (pid == 0) {
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::close(fds[0]);
    ::close(fds[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(fds[1]);
  return std::make_unique<FdTransport>(fds[0], fds[0], pid);
}

TcpListener::TcpListener(uint16_t port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) ThrowErrno("socket");
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) ThrowErrno("bind");
  if (::listen(fd_, 8) != 0) ThrowErrno("listen");
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { Close(); }

void TcpListener::Close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    fd_ = -1;
  }
}

std::unique_ptr<Transport> TcpListener::Accept() {
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) ThrowErrno("accept");
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<FdTransport>(fd, fd);
}

}  // namespace p2codec::wire
