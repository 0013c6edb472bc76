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

#include "qmimo/channel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace qmimo {

void UserGeometry::validate() const
{
    if (distances_m.empty())
        throw std::invalid_argument("UserGeometry: no users");
    for (double d : distances_m)
        if (!(d > 0.0) || d > cell_radius_m)
            throw std::invalid_argument("UserGeometry: distance outside (0, cell radius]");
}

UserGeometry drop_users(Rng &rng, int users, double min_radius_m, double cell_radius_m)
{
    if (users < 1)
        throw std::invalid_argument("drop_users: need at least one user");
    if (!(min_radius_m > 0.0) || min_radius_m > cell_radius_m)
        throw std::invalid_argument("drop_users: invalid annulus");

    std::uniform_real_distribution<double> area(min_radius_m * min_radius_m, cell_radius_m * cell_radius_m);
    UserGeometry g;
    g.cell_radius_m = cell_radius_m;
    g.distances_m.reserve(users);
    for (int k = 0; k < users; ++k)
        g.distances_m.push_back(std::sqrt(area(rng)));
    return g;
}

void ChannelProcessConfig::validate() const
{
    if (path_count < 1)
        throw std::invalid_argument("ChannelProcessConfig: path_count must be >= 1");
    if (!(ar_coefficient >= 0.0 && ar_coefficient <= 1.0))
        throw std::invalid_argument("ChannelProcessConfig: ar_coefficient must lie in [0,1]");
    if (element_spacing != 0.5)
        throw std::invalid_argument("ChannelProcessConfig: only half-wavelength spacing is supported");
}

double pathloss_db(double distance_m, double offset_db, double slope)
{
    if (!(distance_m > 0.0))
        throw std::domain_error("pathloss_db: distance must be positive");
    return offset_db + slope * std::log10(distance_m);
}

double pathloss_gain(double distance_m, const ChannelProcessConfig &cfg)
{
    return std::pow(10.0, -pathloss_db(distance_m, cfg.pathloss_offset_db, cfg.pathloss_slope) / 10.0);
}

CVector ula_steering(int antennas, double sine_angle)
{
    if (antennas < 1)
        throw std::invalid_argument("ula_steering: need at least one antenna");
    if (!(std::abs(sine_angle) <= 1.0))
        throw std::domain_error("ula_steering: |sine_angle| must not exceed 1");

    const double scale = 1.0 / std::sqrt(static_cast<double>(antennas));
    CVector a(antennas);
    for (int m = 0; m < antennas; ++m)
        a(m) = std::polar(scale, -std::numbers::pi * m * sine_angle);
    return a;
}

RMatrix draw_path_angles(Rng &rng, int users, const ChannelProcessConfig &cfg)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RMatrix angles(users, cfg.path_count);
    for (int k = 0; k < users; ++k)
        for (int p = 0; p < cfg.path_count; ++p)
            angles(k, p) = u(rng);
    return angles;
}

ChannelSample draw_channel(Rng &rng, const UserGeometry &geometry, int antennas, const ChannelProcessConfig &cfg,
                           const RMatrix *path_angles)
{
    cfg.validate();
    const int K = geometry.user_count();
    const int Np = cfg.path_count;
    const bool fresh = cfg.angle_model == AngleModel::per_draw || path_angles == nullptr;
    if (!fresh && (path_angles->rows() != K || path_angles->cols() != Np))
        throw std::invalid_argument("draw_channel: path angle table does not match users x path_count");

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ChannelSample s;
    s.matrix = CMatrix::Zero(antennas, K);
    const double spread = std::sqrt(static_cast<double>(antennas) / Np);
    for (int k = 0; k < K; ++k)
    {
        const double amp = std::sqrt(pathloss_gain(geometry.distances_m[k], cfg)) * spread;
        for (int p = 0; p < Np; ++p)
        {
            const double angle = fresh ? u(rng) : (*path_angles)(k, p);
            const cplx alpha = complex_normal(rng);
            s.matrix.col(k) += (amp * alpha) * ula_steering(antennas, angle);
        }
    }
    return s;
}

ChannelSample evolve_channel(const ChannelSample &prev, Rng &rng, const UserGeometry &geometry,
                             const ChannelProcessConfig &cfg, const RMatrix *path_angles)
{
    if (prev.users() != geometry.user_count())
        throw std::invalid_argument("evolve_channel: previous sample has a different user count");
    ChannelSample innov = draw_channel(rng, geometry, prev.antennas(), cfg, path_angles);
    const double rho = cfg.ar_coefficient;
    ChannelSample next;
    next.matrix = rho * prev.matrix + std::sqrt(1.0 - rho * rho) * innov.matrix;
    next.frame_index = prev.frame_index + 1;
    return next;
}

ChannelStream::ChannelStream(const UserGeometry &geometry, int antennas, const ChannelProcessConfig &cfg,
                             RMatrix path_angles, std::uint64_t seed, std::uint64_t stream_id)
    : geometry_(geometry), antennas_(antennas), cfg_(cfg), path_angles_(std::move(path_angles)),
      rng_(make_rng(seed, stream_id)), stream_id_(stream_id)
{
    geometry_.validate();
    cfg_.validate();
    if (antennas_ < 1)
        throw std::invalid_argument("ChannelStream: need at least one antenna");
}

ChannelSample ChannelStream::next()
{
    const RMatrix *angles = path_angles_.size() > 0 ? &path_angles_ : nullptr;
    ChannelSample s = draw_channel(rng_, geometry_, antennas_, cfg_, angles);
    s.frame_index = frame_++;
    return s;
}

std::vector<ChannelSample> ChannelStream::take(std::size_t count)
{
    std::vector<ChannelSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(next());
    return out;
}

ChannelSample ChannelStream::evolve(const ChannelSample &prev)
{
    if (prev.antennas() != antennas_)
        throw std::invalid_argument("ChannelStream::evolve: antenna count mismatch");
    const RMatrix *angles = path_angles_.size() > 0 ? &path_angles_ : nullptr;
    return evolve_channel(prev, rng_, geometry_, cfg_, angles);
}

void write_channel_csv(std::ostream &os, const std::vector<ChannelSample> &samples, bool header)
{
    if (header)
        os << "frame_index,row,col,re,im\n";
    os.precision(17);
    for (const auto &s : samples)
        for (Eigen::Index c = 0; c < s.matrix.cols(); ++c)
            for (Eigen::Index r = 0; r < s.matrix.rows(); ++r)
                os << s.frame_index << ',' << r << ',' << c << ',' << s.matrix(r, c).real() << ','
                   << s.matrix(r, c).imag() << '\n';
}

} // namespace qmimo
