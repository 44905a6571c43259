#include <gtest/gtest.h>

#include "gvb/approval_policy.hpp"

using namespace gvb;

namespace {
SubscriberId id(const char* s) { return SubscriberId(s); }
}  // namespace

TEST(ApprovalRegistry, StoresAndReturnsPolicy) {
  ApprovalRegistry reg;
  reg.set_policy(id("A"), 5, 30, 3, {id("C")});
  BurstPolicy p = reg.get_policy(id("A"));
  EXPECT_EQ(p.burst_seconds, 5);
  EXPECT_EQ(p.gap_seconds, 30);
  EXPECT_EQ(p.max_bursts, 3);
  EXPECT_EQ(p.approved_callers, std::set<SubscriberId>{id("C")});
  EXPECT_TRUE(p.approves(id("C")));
}

TEST(ApprovalRegistry, UnknownCalleeGetsDefaults) {
  ApprovalRegistry reg;
  BurstPolicy p = reg.get_policy(id("Z"));
  EXPECT_EQ(p.callee, id("Z"));
  EXPECT_EQ(p.burst_seconds, 5);
  EXPECT_EQ(p.gap_seconds, 30);
  EXPECT_EQ(p.max_bursts, 3);
  EXPECT_TRUE(p.approved_callers.empty());
}

TEST(ApprovalRegistry, LastWriterWins) {
  ApprovalRegistry reg;
  reg.set_policy(id("A"), 5, 30, 3, {id("C")});
  reg.set_policy(id("A"), 4, 10, 2, {id("C")});
  BurstPolicy expected{id("A"), 4, 10, 2, {id("C")}};
  EXPECT_EQ(reg.get_policy(id("A")), expected);
}

TEST(ApprovalRegistry, BoundaryPolicyIsValid) {
  ApprovalRegistry reg;
  EXPECT_NO_THROW(reg.set_policy(id("A"), 4, 0, 1, {}));
  EXPECT_EQ(reg.get_policy(id("A")).gap_seconds, 0);
  // t outside 3..5 is allowed when configured explicitly.
  EXPECT_NO_THROW(reg.set_policy(id("A"), 1, 0, 1, {}));
  EXPECT_NO_THROW(reg.set_policy(id("A"), 12, 0, 1, {}));
}

TEST(ApprovalRegistry, InvalidPoliciesRejectedWithoutMutation) {
  ApprovalRegistry reg;
  reg.set_policy(id("A"), 4, 10, 2, {});
  auto expect_invalid = [&](Seconds t, Seconds g, int n, std::set<SubscriberId> approved) {
    try {
      reg.set_policy(id("A"), t, g, n, std::move(approved));
      ADD_FAILURE() << "accepted t=" << t << " G=" << g << " N=" << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidPolicy);
    }
  };
  expect_invalid(0, 10, 2, {});
  expect_invalid(5, -1, 2, {});
  expect_invalid(5, 10, 0, {});
  expect_invalid(5, 10, 2, {id("A")});
  EXPECT_EQ(reg.get_policy(id("A")).burst_seconds, 4);
}

TEST(ApprovalRegistry, ApprovalIsDirectional) {
  ApprovalRegistry reg;
  reg.set_policy(id("A"), 5, 30, 3, {id("C")});
  EXPECT_TRUE(reg.get_policy(id("A")).approves(id("C")));
  EXPECT_FALSE(reg.get_policy(id("C")).approves(id("A")));
}

TEST(SubscriberId, RejectsEmptyAndWhitespace) {
  EXPECT_THROW(SubscriberId(""), Error);
  EXPECT_THROW(SubscriberId("A B"), Error);
  EXPECT_NO_THROW(SubscriberId("alice-01"));
}
