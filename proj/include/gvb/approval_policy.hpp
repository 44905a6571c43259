#pragma once

#include <map>
#include <set>

#include "gvb/common.hpp"

namespace gvb {

/// Callee-configured burst rules: duration t, gap G, budget N and the set of
/// callers allowed to send bursts while waiting.
struct BurstPolicy {
  SubscriberId callee;
  Seconds burst_seconds = 5;
  Seconds gap_seconds = 30;
  int max_bursts = 3;
  std::set<SubscriberId> approved_callers;

  bool approves(const SubscriberId& caller) const { return approved_callers.contains(caller); }

  friend bool operator==(const BurstPolicy&, const BurstPolicy&) = default;
};

inline void validate(const BurstPolicy& p) {
  if (p.burst_seconds < 1) throw Error(ErrorCode::InvalidPolicy, "burst duration t must be >= 1");
  if (p.gap_seconds < 0) throw Error(ErrorCode::InvalidPolicy, "gap G must be >= 0");
  if (p.max_bursts < 1) throw Error(ErrorCode::InvalidPolicy, "budget N must be >= 1");
  if (p.approves(p.callee)) {
    throw Error(ErrorCode::InvalidPolicy, "callee " + p.callee.str() + " cannot approve itself");
  }
}

inline BurstPolicy default_policy(const SubscriberId& callee) {
  BurstPolicy p;
  p.callee = callee;
  return p;
}

/// Per-callee policy registry. Unconfigured callees get the default policy.
class ApprovalRegistry {
 public:
  const BurstPolicy& set_policy(const SubscriberId& callee, Seconds t, Seconds gap, int n,
                                std::set<SubscriberId> approved) {
    BurstPolicy p{callee, t, gap, n, std::move(approved)};
    validate(p);
    auto [it, inserted] = policies_.insert_or_assign(callee, std::move(p));
    return it->second;
  }

  BurstPolicy get_policy(const SubscriberId& callee) const {
    if (auto it = policies_.find(callee); it != policies_.end()) return it->second;
    return default_policy(callee);
  }

 private:
  std::map<SubscriberId, BurstPolicy> policies_;
};

}  // namespace gvb
