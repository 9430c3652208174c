// Copyright 2026 The mapcnot Authors
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

#ifndef MAPCNOT_MAPCNOT_HPP_
#define MAPCNOT_MAPCNOT_HPP_

#include "mapcnot/calibration.hpp"
#include "mapcnot/device.hpp"
#include "mapcnot/dj.hpp"
#include "mapcnot/errors.hpp"
#include "mapcnot/experiments.hpp"
#include "mapcnot/gates.hpp"
#include "mapcnot/io.hpp"
#include "mapcnot/linalg.hpp"
#include "mapcnot/optim.hpp"
#include "mapcnot/pulse.hpp"
#include "mapcnot/tomography.hpp"

#endif  // MAPCNOT_MAPCNOT_HPP_
