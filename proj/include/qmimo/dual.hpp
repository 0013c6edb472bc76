// SPDX-License-Identifier: Apache-2.0
//
// qmimo - stochastic hybrid combining for quantized massive MIMO uplinks
// Copyright (C) 2026 The qmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef QMIMO_DUAL_HPP
#define QMIMO_DUAL_HPP

#include "qmimo/ops.hpp"
#include "qmimo/surrogate.hpp"

#include <stdexcept>

namespace qmimo {

// The decoupled set chi: 0 <= p_k <= P_k^max, 0 <= c_ij <= 1, v and w free,
// plus the selection coupling (unit column sums, row sums at most one) which is
// carried by multipliers. A frozen block is the singleton {its value at the
// surrogate center}.
struct FeasibleSet
{
    Layout layout;
    RVector p_max;
    bool freeze_selection = false;
    bool freeze_combiner = false;
    bool freeze_beamformers = false;

    FeasibleSet() = default;
    FeasibleSet(const Layout &l, const RVector &pmax) : layout(l), p_max(pmax) {}

    RVector free_mask() const;
    // Box bounds plus coupling constraints, each within `tol`.
    bool contains(const CVector &x, double tol = 1e-9) const;
};

// Multipliers: lambda (rate constraints, >= 0), mu (row sums, >= 0), delta
// (column sums, sign free). mu and delta are empty when the selection is frozen.
struct DualState
{
    RVector rate_multipliers;
    RVector row_multipliers;
    RVector column_multipliers;
};

enum class DualMethod
{
    newton,               // projected Newton on the dual with exact generalized Hessian
    projected_subgradient // diminishing 1/sqrt(t) steps; slow, kept for comparison
};

struct DualOptions
{
    DualMethod method = DualMethod::newton;
    double tolerance = 1e-10;      // natural residual of the dual optimality conditions
    int max_iterations = 2000;     // Newton iterations
    int max_subgradient_iterations = 5000;
    double subgradient_tolerance = 1e-7;
    // Residual at which a stalled Newton run is still accepted rather than
    // handed over to the subgradient method.
    double fallback_tolerance = 1e-6;
};

struct SubproblemSolution
{
    CVector x;
    DualState dual;
    double objective = 0.0;  // sum p for the power problem, xi for the feasibility problem
    double dual_value = 0.0;
    int iterations = 0;
    double residual = 0.0;  // natural residual at the returned multipliers
};

class DualNonConvergence : public std::runtime_error
{
  public:
    DualNonConvergence(const std::string &what, SubproblemSolution best)
        : std::runtime_error(what), best_(std::move(best))
    {
    }
    const SubproblemSolution &best() const { return best_; }

  private:
    SubproblemSolution best_;
};

// argmin_{t in [lo,hi]} a t^2 + b t for real coordinates (a > 0).
double closed_form_coordinate(double a, double b, double lo, double hi);
// argmin_t a |t|^2 + Re[b t] over the complex plane (a > 0): -conj(b)/(2a).
cplx closed_form_coordinate(double a, cplx b);

// min sum_k p_k  s.t. f_k(x) <= 0 for all k, x in chi.
// Requires a strictly feasible problem (certified by solve_feasibility).
SubproblemSolution solve_subproblem(const SurrogateSet &surrogates, const FeasibleSet &set,
                                    const DualOptions &options = {}, const DualState *warm = nullptr,
                                    OpCounter *ops = nullptr);

// min xi  s.t. f_k(x) <= xi for all k, x in chi; objective = xi.
SubproblemSolution solve_feasibility(const SurrogateSet &surrogates, const FeasibleSet &set,
                                     const DualOptions &options = {}, const DualState *warm = nullptr,
                                     OpCounter *ops = nullptr);

// Euclidean projection onto the probability simplex.
RVector project_simplex(const RVector &v);

} // namespace qmimo

#endif
