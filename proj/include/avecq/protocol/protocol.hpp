#pragma once

#include "avecq/protocol/audit.hpp"
#include "avecq/protocol/common.hpp"
#include "avecq/protocol/messages.hpp"
#include "avecq/protocol/registration_authority.hpp"
#include "avecq/protocol/requester.hpp"
#include "avecq/protocol/worker.hpp"
