/* Copyright 2026 The Dagcache Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef DAGCACHE_DAGCACHE_HPP_
#define DAGCACHE_DAGCACHE_HPP_

#include "dagcache/catalog.hpp"
#include "dagcache/dag.hpp"
#include "dagcache/errors.hpp"
#include "dagcache/fingerprint.hpp"
#include "dagcache/generator.hpp"
#include "dagcache/objective.hpp"
#include "dagcache/offline.hpp"
#include "dagcache/online.hpp"
#include "dagcache/policies.hpp"
#include "dagcache/projection.hpp"
#include "dagcache/simulator.hpp"
#include "dagcache/trace.hpp"
#include "dagcache/trace_io.hpp"
#include "dagcache/verify.hpp"

#define DAGCACHE_VERSION "1.0.0"

#endif  // DAGCACHE_DAGCACHE_HPP_
