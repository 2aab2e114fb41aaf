/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "srnet/baselines.hpp"
#include "srnet/channel.hpp"
#include "srnet/checkpoint.hpp"
#include "srnet/config.hpp"
#include "srnet/dataset_io.hpp"
#include "srnet/error.hpp"
#include "srnet/evaluation.hpp"
#include "srnet/geometry.hpp"
#include "srnet/l2_projection.hpp"
#include "srnet/mlp.hpp"
#include "srnet/policy.hpp"
#include "srnet/projection.hpp"
#include "srnet/scenario.hpp"
#include "srnet/training.hpp"
