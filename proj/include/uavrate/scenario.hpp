#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace uvr {

// Problem-instance constants and bounds. Altitude/beamwidth limits are the
// un-squared quantities (meters / radians); the optimizer works on their
// squares.
struct ScenarioParams {
    std::uint64_t seed = 1;
    int num_users = 20;                 // K, even
    double cell_radius_m = 300.0;       // R
    double ref_gain = 3.24e-4;          // channel power gain at 1 m
    double total_bandwidth_hz = 15e6;   // B
    double noise_density_mw_per_hz = 3.9810717055349565e-18;  // -174 dBm/Hz
    double total_power_mw = 1.9952623149688795;               // 3 dBm
    double altitude_min_m = 50.0;
    double altitude_max_m = 500.0;
    double beamwidth_min_rad = 1e-3;
    double beamwidth_max_rad = 1.5707953267948966;  // pi/2 - 1e-6
    std::array<double, 2> near_annulus_m = {10.0, 150.0};
    std::array<double, 2> far_annulus_m = {150.0, 300.0};
};

// Immutable problem instance. Near users occupy indices 0..K/2-1, far users
// K/2..K-1; pairing maps each near index to its far partner (0-based).
struct Scenario {
    ScenarioParams params;
    std::vector<std::array<double, 2>> user_xy;
    std::array<double, 2> uav_xy = {0.0, 0.0};
    std::vector<double> sq_dist;        // d_k = ||z_k - z_u||^2, m^2
    std::vector<int> pairing;           // pairing[k] = far index of near user k
    double noise_power_total = 0.0;     // sigma_B = sigma^2 * B, mW

    int num_users() const { return static_cast<int>(user_xy.size()); }
    int num_pairs() const { return num_users() / 2; }
};

std::vector<std::string> validate_params(const ScenarioParams& p);

// Deterministic in `p.seed`: K/2 users uniform-in-area in the near annulus,
// K/2 in the far annulus, UAV at the cell center, pairing k <-> k + K/2 with
// both groups sorted by distance. Throws std::invalid_argument on bad params.
Scenario generate_scenario(const ScenarioParams& p);

// Diagnostic check of all Scenario invariants; empty means valid.
std::vector<std::string> validate_scenario(const Scenario& s);

// JSON document with top-level keys params / user_xy / uav_xy / pairing
// (pairing serialized 1-based). serialize(parse(serialize(s))) is
// byte-identical.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& s, const std::string& path);

// FNV-1a of the serialized scenario, as 16 hex digits.
std::string scenario_digest(const Scenario& s);

}  // namespace uvr
