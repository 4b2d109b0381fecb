// Copyright 2026 The PSFC Authors
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


#pragma once

#include "psfc/audit.hpp"
#include "psfc/cli.hpp"
#include "psfc/client.hpp"
#include "psfc/error.hpp"
#include "psfc/field.hpp"
#include "psfc/permutation.hpp"
#include "psfc/protocol_types.hpp"
#include "psfc/rng.hpp"
#include "psfc/scheduler.hpp"
#include "psfc/server.hpp"
#include "psfc/stats.hpp"
#include "psfc/tcp.hpp"
#include "psfc/transport.hpp"
#include "psfc/wire.hpp"
