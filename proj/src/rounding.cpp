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

#include "qmimo/rounding.hpp"

#include <stdexcept>
#include <vector>

namespace qmimo {

int threshold_column(const RVector &column, const std::vector<char> &allowed)
{
    const int n = static_cast<int>(column.size());
    auto count_above = [&](double eps, int &last) {
        int c = 0;
        for (int i = 0; i < n; ++i)
            if (allowed[i] && column(i) > eps)
            {
                ++c;
                last = i;
            }
        return c;
    };

    double lo = -1e-300, hi = 1.0;
    int row = -1;
    for (int it = 0; it < 200; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        int last = -1;
        const int c = count_above(mid, last);
        if (c == 1)
        {
            row = last;
            break;
        }
        if (c > 1)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 0.0)
            break;
    }
    if (row >= 0)
        return row;

    // Exact ties (or an all-zero column) cannot be split by a threshold.
    for (int i = 0; i < n; ++i)
        if (allowed[i] && (row < 0 || column(i) > column(row)))
            row = i;
    if (row < 0)
        throw std::logic_error("threshold_column: no admissible row");
    return row;
}

SelectionMatrix round_selection(const RMatrix &relaxed)
{
    const int N = static_cast<int>(relaxed.rows());
    const int S = static_cast<int>(relaxed.cols());
    if (N < S)
        throw std::invalid_argument("round_selection: fewer codewords than RF chains");
    if (S == 0 || (relaxed.array() < 0.0).any() || (relaxed.array() > 1.0).any() || !relaxed.allFinite())
        throw std::invalid_argument("round_selection: relaxed entries must lie in [0,1]");

    std::vector<std::vector<char>> allowed(S, std::vector<char>(N, 1));
    std::vector<int> claim(S);
    for (int s = 0; s < S; ++s)
        claim[s] = threshold_column(relaxed.col(s), allowed[s]);

    // Each pass settles at least one contested row, so this ends within N*S passes.
    for (int pass = 0; pass <= N * S; ++pass)
    {
        bool conflict = false;
        for (int r = 0; r < N && !conflict; ++r)
        {
            int owner = -1;
            for (int s = 0; s < S; ++s)
            {
                if (claim[s] != r)
                    continue;
                if (owner < 0)
                {
                    owner = s;
                    continue;
                }
                conflict = true;
                const int loser = relaxed(r, s) > relaxed(r, owner) ? owner : s;
                owner = loser == owner ? s : owner;
                allowed[loser][r] = 0;
                claim[loser] = threshold_column(relaxed.col(loser), allowed[loser]);
            }
        }
        if (!conflict)
            break;
    }

    SelectionMatrix out;
    out.matrix = RMatrix::Zero(N, S);
    out.relaxed = false;
    for (int s = 0; s < S; ++s)
        out.matrix(claim[s], s) = 1.0;
    if (!is_valid_binary_selection(out.matrix))
        throw std::logic_error("round_selection: conflict resolution did not converge");
    return out;
}

} // namespace qmimo
