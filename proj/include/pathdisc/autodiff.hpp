// pathdisc/autodiff.hpp

// Copyright 2026  The pathdisc Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over dense row-major matrices.

#pragma once

#include "pathdisc/autodiff/grad_check.hpp"
#include "pathdisc/autodiff/lstm.hpp"
#include "pathdisc/autodiff/ops.hpp"
#include "pathdisc/autodiff/tape.hpp"

namespace pathdisc {

using Tape = ad::Tape<double>;
using Var = ad::Var<double>;

}  // namespace pathdisc
