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

#ifndef QMIMO_CHANNEL_HPP
#define QMIMO_CHANNEL_HPP

#include "qmimo/types.hpp"

#include <iosfwd>
#include <vector>

namespace qmimo {

// Users dropped in the cell; distances in meters.
struct UserGeometry
{
    std::vector<double> distances_m;
    double cell_radius_m = 200.0;

    int user_count() const { return static_cast<int>(distances_m.size()); }
    void validate() const;
};

// Uniform-in-area drop inside the annulus [min_radius_m, cell_radius_m].
UserGeometry drop_users(Rng &rng, int users, double min_radius_m = 35.0, double cell_radius_m = 200.0);

// How path angles behave from frame to frame.
//   per_draw: every call redraws all angles (isotropic channel statistics).
//   per_drop: angles are a long-term property of each user, only path gains fade.
enum class AngleModel
{
    per_draw,
    per_drop
};

struct ChannelProcessConfig
{
    int path_count = 8;
    double ar_coefficient = 0.9;
    double pathloss_offset_db = 30.6;
    double pathloss_slope = 36.7;
    double element_spacing = 0.5; // in wavelengths, fixed half-wavelength ULA
    AngleModel angle_model = AngleModel::per_drop;

    void validate() const;
};

struct ChannelSample
{
    CMatrix matrix; // M x K, column k is h_k
    std::uint64_t frame_index = 0;

    int antennas() const { return static_cast<int>(matrix.rows()); }
    int users() const { return static_cast<int>(matrix.cols()); }
};

// Large-scale pathloss in dB: offset + slope * log10(d).
double pathloss_db(double distance_m, double offset_db = 30.6, double slope = 36.7);

// Linear gain 10^(-PL/10).
double pathloss_gain(double distance_m, const ChannelProcessConfig &cfg);

// Half-wavelength ULA response, element m = exp(-i*pi*m*sine_angle)/sqrt(M).
CVector ula_steering(int antennas, double sine_angle);

// Per-user path sine-angles (users x path_count), each uniform on [-1, 1).
RMatrix draw_path_angles(Rng &rng, int users, const ChannelProcessConfig &cfg);

// Extended Saleh-Valenzuela draw. Column k is
//   sqrt(beta_k) * sqrt(M/Np) * sum_p alpha_p * a(sin theta_p)
// with alpha_p ~ CN(0,1). With AngleModel::per_draw the angles are redrawn on
// every call; otherwise `path_angles` (users x Np) is used.
ChannelSample draw_channel(Rng &rng, const UserGeometry &geometry, int antennas, const ChannelProcessConfig &cfg,
                           const RMatrix *path_angles = nullptr);

// First-order autoregressive step: rho*H + sqrt(1-rho^2)*H_innov, frame_index + 1.
ChannelSample evolve_channel(const ChannelSample &prev, Rng &rng, const UserGeometry &geometry,
                             const ChannelProcessConfig &cfg, const RMatrix *path_angles = nullptr);

// A seeded stream of i.i.d. frames for one user drop. The whole stream is a pure
// function of (seed, stream id, geometry, config).
class ChannelStream
{
  public:
    ChannelStream(const UserGeometry &geometry, int antennas, const ChannelProcessConfig &cfg, RMatrix path_angles,
                  std::uint64_t seed, std::uint64_t stream_id);

    ChannelSample next();
    std::vector<ChannelSample> take(std::size_t count);

    // AR(1) successor of `prev` using this stream's randomness.
    ChannelSample evolve(const ChannelSample &prev);

    std::uint64_t frames_drawn() const { return frame_; }
    std::uint64_t stream_id() const { return stream_id_; }

  private:
    UserGeometry geometry_;
    int antennas_;
    ChannelProcessConfig cfg_;
    RMatrix path_angles_;
    Rng rng_;
    std::uint64_t stream_id_;
    std::uint64_t frame_ = 0;
};

// Debug dump: frame_index,row,col,re,im
void write_channel_csv(std::ostream &os, const std::vector<ChannelSample> &samples, bool header = true);

} // namespace qmimo

#endif
