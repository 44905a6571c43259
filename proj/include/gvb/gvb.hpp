#pragma once

#include "gvb/approval_policy.hpp"
#include "gvb/burst_scheduler.hpp"
#include "gvb/call_engine.hpp"
#include "gvb/common.hpp"
#include "gvb/external_generator.hpp"
#include "gvb/incapacity_detector.hpp"
#include "gvb/message_generator.hpp"
#include "gvb/priority_engine.hpp"
#include "gvb/scenario.hpp"
#include "gvb/simulator.hpp"
#include "gvb/trace.hpp"
