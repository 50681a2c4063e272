#pragma once

// Version-1 wire protocol between the codec and an external logit server.
// Every message travels in a frame: u32 little-endian payload length, then
// the payload. Payloads start with a one-byte message type; all integers are
// little-endian.
//
//   INIT        01 | version u8 | mode u8 | expects_deterministic u8
//                  | map_fingerprint u64 | prompt_len u32 | prompt bytes
//   INIT_OK     81 | vocab_size u32 | context_window u32 | 256 x token id u32
//                  | model_fingerprint u64 | prompt_tokens u32 | deterministic u8
//   PREDICT     02 | count u32 | count x (session_id u64 | n u32 | n symbol bytes)
//   PREDICT_OK  82 | count u32 | count x 256 x f32 logits (1024 bytes each)
//   RESET       03 | session_id u64
//   RESET_OK    83 | session_id u64
//   ERROR       FF | error kind u8 | len u32 | message bytes
//
// PREDICT symbols are the delta since the session's previous PREDICT. The
// server gathers logits at the digital token IDs before replying, so the
// client only ever sees 256 values per prediction.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "p2codec/error.hpp"
#include "p2codec/image.hpp"

namespace p2codec::wire {

inline constexpr uint8_t kProtocolVersion = 1;
inline constexpr uint32_t kMaxFrameBytes = 64u << 20;
inline constexpr std::size_t kLogitPayloadBytes = 256 * 4;

enum class MessageType : uint8_t {
  kInit = 0x01,
  kPredict = 0x02,
  kReset = 0x03,
  kInitOk = 0x81,
  kPredictOk = 0x82,
  kResetOk = 0x83,
  kError = 0xFF,
};

struct InitRequest {
  uint8_t version = kProtocolVersion;
  std::string prompt_text;
  OrderingMode mode = OrderingMode::kChannelJoint;
  uint64_t map_fingerprint = 0;  // 0 when the client does not know it yet
  bool expects_deterministic = true;
  friend bool operator==(const InitRequest&, const InitRequest&) = default;
};

struct InitResponse {
  uint32_t vocab_size = 0;
  uint32_t context_window = 0;
  std::array<uint32_t, 256> digital_token_ids{};
  uint64_t model_fingerprint = 0;
  uint32_t prompt_tokens = 0;
  bool deterministic = false;
  friend bool operator==(const InitResponse&, const InitResponse&) = default;
};

struct PredictItem {
  uint64_t session_id = 0;
  std::vector<uint8_t> new_symbols;
  friend bool operator==(const PredictItem&, const PredictItem&) = default;
};

struct PredictRequest {
  std::vector<PredictItem> items;
  friend bool operator==(const PredictRequest&, const PredictRequest&) = default;
};

using Logits256 = std::array<float, 256>;

struct PredictResponse {
  std::vector<Logits256> logits;
  friend bool operator==(const PredictResponse&, const PredictResponse&) = default;
};

struct ResetRequest {
  uint64_t session_id = 0;
  friend bool operator==(const ResetRequest&, const ResetRequest&) = default;
};

struct ResetResponse {
  uint64_t session_id = 0;
  friend bool operator==(const ResetResponse&, const ResetResponse&) = default;
};

struct ErrorResponse {
  ErrorKind kind = ErrorKind::kProviderUnavailable;
  std::string message;
  friend bool operator==(const ErrorResponse&, const ErrorResponse&) = default;
};

using Message = std::variant<InitRequest, InitResponse, PredictRequest, PredictResponse, ResetRequest, ResetResponse,
                             ErrorResponse>;

std::vector<uint8_t> EncodeMessage(const Message& message);
// Throws kCorruptProviderOutput on malformed payloads.
Message DecodeMessage(std::span<const uint8_t> payload);

// Byte stream the frames travel over.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void WriteAll(std::span<const uint8_t> bytes) = 0;
  // Fills `bytes` completely; returns false on a clean EOF before the first
  // byte, throws kProviderUnavailable on a short read.
  virtual bool ReadExact(std::span<uint8_t> bytes) = 0;
};

void WriteFrame(Transport& transport, std::span<const uint8_t> payload);
// Returns false on clean EOF.
bool ReadFrame(Transport& transport, std::vector<uint8_t>& payload);

void SendMessage(Transport& transport, const Message& message);
// Throws kProviderUnavailable on EOF.
Message ReceiveMessage(Transport& transport);

// Transport over a pair of file descriptors; closes them on destruction.
class FdTransport : public Transport {
 public:
  FdTransport(int read_fd, int write_fd, int child_pid = -1);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void WriteAll(std::span<const uint8_t> bytes) override;
  bool ReadExact(std::span<uint8_t> bytes) override;

 private:
  int read_fd_;
  int write_fd_;
  int child_pid_;
};

// "host:port" over TCP.
std::unique_ptr<Transport> ConnectTcp(const std::string& address);
// Runs `command` under /bin/sh and talks to it over its stdin/stdout.
std::unique_ptr<Transport> SpawnProcess(const std::string& command);

// Accepts one TCP connection at a time on `port` (0 picks a free port;
// the bound port is returned through `bound_port` before blocking).
class TcpListener {
 public:
  explicit TcpListener(uint16_t port);
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  std::unique_ptr<Transport> Accept();
  void Close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

}  // namespace p2codec::wire
