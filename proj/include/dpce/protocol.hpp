//
// Copyright 2026 The dpce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dpce/linalg.hpp"

// Message passing between M access points and one central processor. The
// backhaul is the only path between nodes: an AP can send Gram releases and
// detection statistics to the CPU, the CPU can only broadcast eigen
// information back. Every message is recorded in a transcript (metadata and
// the facts the privacy audit needs; payloads are not retained after
// delivery).

namespace dpce {

enum class MessageKind { GramRelease, EigBroadcast, BasisBroadcast, LocalDetection };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::GramRelease: return "GramRelease";
    case MessageKind::EigBroadcast: return "EigBroadcast";
    case MessageKind::BasisBroadcast: return "BasisBroadcast";
    case MessageKind::LocalDetection: return "LocalDetection";
  }
  return "?";
}

inline constexpr int kCpu = -1;
inline constexpr int kAllAps = -2;

inline constexpr std::size_t kComplexBytes = 16;
inline constexpr std::size_t kRealBytes = 8;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Message {
  MessageKind kind = MessageKind::GramRelease;
  int sender = kCpu;
  int receiver = kCpu;
  int round = 0;
  CMatrix payload;
  std::optional<double> scalar;  // lambda-tilde for EigBroadcast

  std::size_t bytes() const {
    return static_cast<std::size_t>(payload.size()) * kComplexBytes +
           (scalar ? kRealBytes : 0);
  }
};

struct TranscriptRecord {
  std::size_t id = 0;
  int round = 0;
  int sender = 0;
  int receiver = 0;
  MessageKind kind = MessageKind::GramRelease;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool hermitian = false;  // exact, bitwise
  std::size_t bytes = 0;
};

using Transcript = std::vector<TranscriptRecord>;

inline bool exactly_hermitian(const CMatrix& a) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      if (a(i, j) != std::conj(a(j, i))) return false;
    }
  }
  return true;
}

struct OverheadLedger {
  std::vector<std::size_t> unicast_bytes;  // per AP
  std::size_t broadcast_bytes = 0;
  // (round, kind) -> number of messages
  std::map<std::pair<int, MessageKind>, std::size_t> counts;

  std::size_t unicast_count(int ap, MessageKind kind,
                            const Transcript& t) const {
    std::size_t n = 0;
    for (const auto& r : t) {
      if (r.sender == ap && r.receiver == kCpu && r.kind == kind) ++n;
    }
    return n;
  }

  std::size_t count(MessageKind kind) const {
    std::size_t n = 0;
    for (const auto& [key, c] : counts) {
      if (key.second == kind) n += c;
    }
    return n;
  }
};

inline std::string node_name(int id) {
  if (id == kCpu) return "cpu";
  if (id == kAllAps) return "all";
  return "ap" + std::to_string(id);
}

inline OverheadLedger build_ledger(const Transcript& t, int num_aps) {
  OverheadLedger led;
  led.unicast_bytes.assign(static_cast<std::size_t>(num_aps), 0);
  for (const auto& r : t) {
    led.counts[{r.round, r.kind}] += 1;
    if (r.receiver == kAllAps) {
      led.broadcast_bytes += r.bytes;
    } else if (r.receiver == kCpu && r.sender >= 0 && r.sender < num_aps) {
      led.unicast_bytes[static_cast<std::size_t>(r.sender)] += r.bytes;
    }
  }
  return led;
}

class Backhaul {
 public:
  explicit Backhaul(int num_aps) : num_aps_(num_aps) {
    if (num_aps < 1) throw ProtocolError("backhaul needs at least one AP");
  }

  int num_aps() const { return num_aps_; }

  void send_to_cpu(Message msg) {
    if (msg.kind != MessageKind::GramRelease &&
        msg.kind != MessageKind::LocalDetection) {
      throw ProtocolError(std::string("AP may not send ") + to_string(msg.kind));
    }
    if (msg.sender < 0 || msg.sender >= num_aps_) {
      throw ProtocolError("unknown sender " + std::to_string(msg.sender));
    }
    msg.receiver = kCpu;
    record(msg);
    cpu_inbox_[{msg.round, msg.kind}].push_back(std::move(msg));
  }

  void broadcast(Message msg) {
    if (msg.kind != MessageKind::EigBroadcast &&
        msg.kind != MessageKind::BasisBroadcast) {
      throw ProtocolError(std::string("CPU may not broadcast ") + to_string(msg.kind));
    }
    msg.sender = kCpu;
    msg.receiver = kAllAps;
    record(msg);
    last_broadcast_ = std::move(msg);
  }

  // One message per AP for (round, kind), ordered by ascending AP index.
  std::vector<Message> collect_at_cpu(int round, MessageKind kind) {
    auto it = cpu_inbox_.find({round, kind});
    std::vector<std::optional<Message>> slots(static_cast<std::size_t>(num_aps_));
    if (it != cpu_inbox_.end()) {
      for (auto& m : it->second) {
        auto& slot = slots[static_cast<std::size_t>(m.sender)];
        if (slot) {
          throw ProtocolError("duplicate " + std::string(to_string(kind)) +
                              " from " + node_name(m.sender) + " in round " +
                              std::to_string(round));
        }
        slot = std::move(m);
      }
      cpu_inbox_.erase(it);
    }
    std::vector<Message> out;
    out.reserve(slots.size());
    for (int ap = 0; ap < num_aps_; ++ap) {
      auto& slot = slots[static_cast<std::size_t>(ap)];
      if (!slot) {
        throw ProtocolError("missing " + std::string(to_string(kind)) +
                            " from " + node_name(ap) + " in round " +
                            std::to_string(round));
      }
      out.push_back(std::move(*slot));
    }
    return out;
  }

  const Message& receive_broadcast(int ap, int round, MessageKind kind) const {
    if (!last_broadcast_ || last_broadcast_->round != round ||
        last_broadcast_->kind != kind) {
      throw ProtocolError("missing " + std::string(to_string(kind)) + " for " +
                          node_name(ap) + " in round " + std::to_string(round));
    }
    return *last_broadcast_;
  }

  const Transcript& transcript() const { return transcript_; }
  OverheadLedger ledger() const { return build_ledger(transcript_, num_aps_); }

 private:
  void record(const Message& msg) {
    TranscriptRecord r;
    r.id = transcript_.size();
    r.round = msg.round;
    r.sender = msg.sender;
    r.receiver = msg.receiver;
    r.kind = msg.kind;
    r.rows = msg.payload.rows();
    r.cols = msg.payload.cols();
    r.hermitian = exactly_hermitian(msg.payload);
    r.bytes = msg.bytes();
    transcript_.push_back(r);
  }

  int num_aps_;
  std::map<std::pair<int, MessageKind>, std::vector<Message>> cpu_inbox_;
  std::optional<Message> last_broadcast_;
  Transcript transcript_;
};

struct AuditReport {
  bool pass = true;
  std::size_t gram_releases = 0;
  std::vector<std::size_t> offending_ids;
  std::vector<std::string> reasons;
};

// Checks that nothing but Hermitian tau_c x tau_c Gram releases and K x tau_d
// detection statistics ever reached the CPU.
inline AuditReport audit_privacy_surface(const Transcript& t,
                                         Eigen::Index tau_c, Eigen::Index K,
                                         Eigen::Index tau_d) {
  AuditReport rep;
  auto fail = [&](const TranscriptRecord& r, const std::string& why) {
    rep.pass = false;
    rep.offending_ids.push_back(r.id);
    rep.reasons.push_back("message " + std::to_string(r.id) + " (" +
                          node_name(r.sender) + " round " +
                          std::to_string(r.round) + "): " + why);
  };
  for (const auto& r : t) {
    if (r.receiver != kCpu) {
      if (r.sender != kCpu) fail(r, "AP-originated message not addressed to CPU");
      continue;
    }
    switch (r.kind) {
      case MessageKind::GramRelease:
        ++rep.gram_releases;
        if (r.rows != tau_c || r.cols != tau_c) {
          fail(r, "GramRelease payload is " + std::to_string(r.rows) + "x" +
                      std::to_string(r.cols) + ", expected " +
                      std::to_string(tau_c) + "x" + std::to_string(tau_c));
        } else if (!r.hermitian) {
          fail(r, "GramRelease payload is not Hermitian");
        }
        break;
      case MessageKind::LocalDetection:
        if (r.rows != K || r.cols != tau_d) {
          fail(r, "LocalDetection payload has wrong shape");
        }
        break;
      default:
        fail(r, std::string("kind ") + to_string(r.kind) + " sent to CPU");
    }
  }
  return rep;
}

// One JSON object per line: round, sender, receiver, kind, bytes.
inline void write_transcript(const Transcript& t, std::ostream& out) {
  for (const auto& r : t) {
    out << "{\"id\":" << r.id << ",\"round\":" << r.round << ",\"sender\":\""
        << node_name(r.sender) << "\",\"receiver\":\"" << node_name(r.receiver)
        << "\",\"kind\":\"" << to_string(r.kind) << "\",\"bytes\":" << r.bytes
        << "}\n";
  }
}

}  // namespace dpce
