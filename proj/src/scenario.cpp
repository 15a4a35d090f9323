#include "uavrate/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "json_detail.hpp"
#include "uavrate/textio.hpp"

namespace uvr {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

double uniform01(std::mt19937_64& eng) {
    // 53-bit mantissa draw; identical on every platform, unlike
    // std::uniform_real_distribution.
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

double sq(double x) { return x * x; }

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::string> validate_params(const ScenarioParams& p) {
    std::vector<std::string> v;
    if (p.num_users < 2) v.push_back("num_users: must be >= 2");
    if (p.num_users % 2 != 0) v.push_back("num_users: must be even");
    if (!(p.cell_radius_m > 0)) v.push_back("cell_radius_m: must be > 0");
    if (!(p.ref_gain > 0)) v.push_back("ref_gain: must be > 0");
    if (!(p.total_bandwidth_hz > 0)) v.push_back("total_bandwidth_hz: must be > 0");
    if (!(p.noise_density_mw_per_hz > 0)) v.push_back("noise_density_mw_per_hz: must be > 0");
    if (!(p.total_power_mw > 0)) v.push_back("total_power_mw: must be > 0");
    if (!(p.altitude_min_m > 0)) v.push_back("altitude_min_m: must be > 0");
    if (!(p.altitude_min_m <= p.altitude_max_m))
        v.push_back("altitude_max_m: must be >= altitude_min_m");
    if (!(p.beamwidth_min_rad > 0)) v.push_back("beamwidth_min_rad: must be > 0");
    if (!(p.beamwidth_min_rad < p.beamwidth_max_rad))
        v.push_back("beamwidth_max_rad: must be > beamwidth_min_rad");
    if (!(p.beamwidth_max_rad <= kHalfPi - 1e-6 + 1e-15))
        v.push_back("beamwidth_max_rad: must be <= pi/2 - 1e-6");
    auto check_annulus = [&](const std::array<double, 2>& a, const char* name) {
        if (!(a[0] >= 0) || !(a[0] <= a[1]))
            v.push_back(std::string(name) + ": bounds must satisfy 0 <= lo <= hi");
        if (!(a[1] <= p.cell_radius_m))
            v.push_back(std::string(name) + ": must lie inside cell_radius_m");
    };
    check_annulus(p.near_annulus_m, "near_annulus_m");
    check_annulus(p.far_annulus_m, "far_annulus_m");
    if (!(p.near_annulus_m[1] <= p.far_annulus_m[0]))
        v.push_back("far_annulus_m: must not start inside the near annulus");
    return v;
}

Scenario generate_scenario(const ScenarioParams& p) {
    auto bad = validate_params(p);
    if (!bad.empty()) {
        std::string msg = "invalid scenario params:";
        for (const auto& b : bad) msg += " [" + b + "]";
        throw std::invalid_argument(msg);
    }

    const int K = p.num_users;
    const int half = K / 2;
    std::mt19937_64 eng(p.seed);

    auto draw_annulus = [&](const std::array<double, 2>& ann) {
        // Uniform in area: radius grows with sqrt of the uniform draw.
        const double u = uniform01(eng);
        const double r = std::sqrt(sq(ann[0]) + u * (sq(ann[1]) - sq(ann[0])));
        const double phi = 2.0 * M_PI * uniform01(eng);
        return std::array<double, 2>{r * std::cos(phi), r * std::sin(phi)};
    };

    std::vector<std::array<double, 2>> near_xy(half), far_xy(half);
    for (int k = 0; k < half; ++k) near_xy[k] = draw_annulus(p.near_annulus_m);
    for (int k = 0; k < half; ++k) far_xy[k] = draw_annulus(p.far_annulus_m);

    auto sort_by_dist = [](std::vector<std::array<double, 2>>& xs) {
        std::stable_sort(xs.begin(), xs.end(), [](const auto& a, const auto& b) {
            return sq(a[0]) + sq(a[1]) < sq(b[0]) + sq(b[1]);
        });
    };
    sort_by_dist(near_xy);
    sort_by_dist(far_xy);

    Scenario s;
    s.params = p;
    s.uav_xy = {0.0, 0.0};
    s.user_xy.reserve(K);
    s.user_xy.insert(s.user_xy.end(), near_xy.begin(), near_xy.end());
    s.user_xy.insert(s.user_xy.end(), far_xy.begin(), far_xy.end());
    s.sq_dist.resize(K);
    for (int k = 0; k < K; ++k)
        s.sq_dist[k] = sq(s.user_xy[k][0] - s.uav_xy[0]) + sq(s.user_xy[k][1] - s.uav_xy[1]);
    s.pairing.resize(half);
    for (int k = 0; k < half; ++k) s.pairing[k] = k + half;
    s.noise_power_total = p.noise_density_mw_per_hz * p.total_bandwidth_hz;
    return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
    std::vector<std::string> v = validate_params(s.params);
    const int K = s.params.num_users;
    const int half = K / 2;

    if (s.num_users() != K) {
        v.push_back("user_xy: size " + std::to_string(s.num_users()) +
                    " does not match num_users " + std::to_string(K));
        return v;  // index-based checks below would be meaningless
    }
    if (static_cast<int>(s.sq_dist.size()) != K)
        v.push_back("sq_dist: size does not match num_users");
    if (static_cast<int>(s.pairing.size()) != half)
        v.push_back("pairing: size does not match num_users/2");

    for (int k = 0; k < static_cast<int>(s.sq_dist.size()) && k < K; ++k) {
        const double d = sq(s.user_xy[k][0] - s.uav_xy[0]) + sq(s.user_xy[k][1] - s.uav_xy[1]);
        const double scale = std::max(1.0, std::abs(s.sq_dist[k]));
        if (std::abs(d - s.sq_dist[k]) > 1e-9 * scale)
            v.push_back("sq_dist: entry " + std::to_string(k + 1) +
                        " inconsistent with coordinates");
    }
    for (int k = 0; k < K; ++k) {
        const double r = std::hypot(s.user_xy[k][0] - s.uav_xy[0], s.user_xy[k][1] - s.uav_xy[1]);
        if (r > s.params.cell_radius_m * (1 + 1e-12))
            v.push_back("cell_radius_m: user " + std::to_string(k + 1) + " at distance " +
                        std::to_string(r) + " outside R=" + std::to_string(s.params.cell_radius_m));
    }

    if (static_cast<int>(s.pairing.size()) == half) {
        std::vector<int> seen(K, 0);
        bool bijective = true;
        for (int k = 0; k < half; ++k) {
            const int j = s.pairing[k];
            if (j < half || j >= K || seen[j]++) bijective = false;
        }
        if (!bijective) {
            v.push_back("pairing: not a bijection onto the far-user index range");
        } else if (static_cast<int>(s.sq_dist.size()) == K) {
            for (int k = 0; k < half; ++k)
                if (s.sq_dist[s.pairing[k]] < s.sq_dist[k] * (1 - 1e-12))
                    v.push_back("pairing: far user of pair " + std::to_string(k + 1) +
                                " is closer than its near user");
        }
    }

    const double sig_b = s.params.noise_density_mw_per_hz * s.params.total_bandwidth_hz;
    if (std::abs(s.noise_power_total - sig_b) > 1e-9 * std::max(sig_b, 1e-300))
        v.push_back("noise_power_total: does not equal noise_density * bandwidth");
    return v;
}

namespace {

void write_params(std::ostringstream& out, const ScenarioParams& p) {
    out << "    \"seed\": " << p.seed << ",\n";
    out << "    \"num_users\": " << p.num_users << ",\n";
    out << "    \"cell_radius_m\": " << fmt_sci17(p.cell_radius_m) << ",\n";
    out << "    \"ref_gain\": " << fmt_sci17(p.ref_gain) << ",\n";
    out << "    \"total_bandwidth_hz\": " << fmt_sci17(p.total_bandwidth_hz) << ",\n";
    out << "    \"noise_density_mw_per_hz\": " << fmt_sci17(p.noise_density_mw_per_hz) << ",\n";
    out << "    \"total_power_mw\": " << fmt_sci17(p.total_power_mw) << ",\n";
    out << "    \"altitude_min_m\": " << fmt_sci17(p.altitude_min_m) << ",\n";
    out << "    \"altitude_max_m\": " << fmt_sci17(p.altitude_max_m) << ",\n";
    out << "    \"beamwidth_min_rad\": " << fmt_sci17(p.beamwidth_min_rad) << ",\n";
    out << "    \"beamwidth_max_rad\": " << fmt_sci17(p.beamwidth_max_rad) << ",\n";
    out << "    \"near_annulus_m\": [" << fmt_sci17(p.near_annulus_m[0]) << ", "
        << fmt_sci17(p.near_annulus_m[1]) << "],\n";
    out << "    \"far_annulus_m\": [" << fmt_sci17(p.far_annulus_m[0]) << ", "
        << fmt_sci17(p.far_annulus_m[1]) << "]\n";
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    std::ostringstream out;
    out << "{\n  \"params\": {\n";
    write_params(out, s.params);
    out << "  },\n  \"user_xy\": [\n";
    for (std::size_t k = 0; k < s.user_xy.size(); ++k) {
        out << "    [" << fmt_sci17(s.user_xy[k][0]) << ", " << fmt_sci17(s.user_xy[k][1]) << "]"
            << (k + 1 < s.user_xy.size() ? ",\n" : "\n");
    }
    out << "  ],\n  \"uav_xy\": [" << fmt_sci17(s.uav_xy[0]) << ", " << fmt_sci17(s.uav_xy[1])
        << "],\n  \"pairing\": [";
    for (std::size_t k = 0; k < s.pairing.size(); ++k) {
        out << "[" << (k + 1) << ", " << (s.pairing[k] + 1) << "]"
            << (k + 1 < s.pairing.size() ? ", " : "");
    }
    out << "]\n}\n";
    return out.str();
}

namespace {

using nlohmann::json;

void require_object_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    if (!j.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (item.key() == a) ok = true;
        if (!ok) throw std::invalid_argument(where + ": unknown key \"" + item.key() + "\"");
    }
}

double get_num(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw std::invalid_argument(where + ": missing required key \"" + key + "\"");
    if (!j.at(key).is_number())
        throw std::invalid_argument(where + ": key \"" + key + "\" must be a number");
    return j.at(key).get<double>();
}

std::array<double, 2> get_pair(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key))
        throw std::invalid_argument(where + ": missing required key \"" + key + "\"");
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number())
        throw std::invalid_argument(where + ": key \"" + key + "\" must be [number, number]");
    return {a[0].get<double>(), a[1].get<double>()};
}

}  // namespace

ScenarioParams scenario_params_from_json_obj(const nlohmann::json& jp, const std::string& where) {
    require_object_keys(jp,
                        {"seed", "num_users", "cell_radius_m", "ref_gain", "total_bandwidth_hz",
                         "noise_density_mw_per_hz", "total_power_mw", "altitude_min_m",
                         "altitude_max_m", "beamwidth_min_rad", "beamwidth_max_rad",
                         "near_annulus_m", "far_annulus_m"},
                        where);
    ScenarioParams p;
    if (jp.contains("seed")) p.seed = jp.at("seed").get<std::uint64_t>();
    if (jp.contains("num_users")) p.num_users = jp.at("num_users").get<int>();
    auto opt = [&](const char* key, double& field) {
        if (jp.contains(key)) field = get_num(jp, key, where);
    };
    opt("cell_radius_m", p.cell_radius_m);
    opt("ref_gain", p.ref_gain);
    opt("total_bandwidth_hz", p.total_bandwidth_hz);
    opt("noise_density_mw_per_hz", p.noise_density_mw_per_hz);
    opt("total_power_mw", p.total_power_mw);
    opt("altitude_min_m", p.altitude_min_m);
    opt("altitude_max_m", p.altitude_max_m);
    opt("beamwidth_min_rad", p.beamwidth_min_rad);
    opt("beamwidth_max_rad", p.beamwidth_max_rad);
    if (jp.contains("near_annulus_m")) p.near_annulus_m = get_pair(jp, "near_annulus_m", where);
    if (jp.contains("far_annulus_m")) p.far_annulus_m = get_pair(jp, "far_annulus_m", where);
    return p;
}

Scenario scenario_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario JSON parse error: ") + e.what());
    }
    require_object_keys(j, {"params", "user_xy", "uav_xy", "pairing"}, "scenario");
    if (!j.contains("params"))
        throw std::invalid_argument("scenario: missing required key \"params\"");

    Scenario s;
    s.params = scenario_params_from_json_obj(j.at("params"), "scenario.params");

    if (!j.contains("user_xy") || !j.at("user_xy").is_array())
        throw std::invalid_argument("scenario: missing or invalid \"user_xy\"");
    for (const auto& u : j.at("user_xy")) {
        if (!u.is_array() || u.size() != 2)
            throw std::invalid_argument("scenario: user_xy entries must be [x, y]");
        s.user_xy.push_back({u[0].get<double>(), u[1].get<double>()});
    }
    if (j.contains("uav_xy")) {
        const auto& u = j.at("uav_xy");
        if (!u.is_array() || u.size() != 2)
            throw std::invalid_argument("scenario: uav_xy must be [x, y]");
        s.uav_xy = {u[0].get<double>(), u[1].get<double>()};
    }
    if (!j.contains("pairing") || !j.at("pairing").is_array())
        throw std::invalid_argument("scenario: missing or invalid \"pairing\"");
    const int half = static_cast<int>(j.at("pairing").size());
    s.pairing.assign(half, -1);
    for (const auto& pr : j.at("pairing")) {
        if (!pr.is_array() || pr.size() != 2)
            throw std::invalid_argument("scenario: pairing entries must be [k, j(k)] (1-based)");
        const int k = pr[0].get<int>(), jk = pr[1].get<int>();
        if (k < 1 || k > half)
            throw std::invalid_argument("scenario: pairing near index out of range");
        s.pairing[k - 1] = jk - 1;
    }

    s.sq_dist.resize(s.user_xy.size());
    for (std::size_t k = 0; k < s.user_xy.size(); ++k)
        s.sq_dist[k] = sq(s.user_xy[k][0] - s.uav_xy[0]) + sq(s.user_xy[k][1] - s.uav_xy[1]);
    s.noise_power_total = s.params.noise_density_mw_per_hz * s.params.total_bandwidth_hz;
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    return scenario_from_json(read_text_file(path));
}

void save_scenario_file(const Scenario& s, const std::string& path) {
    write_text_file(path, scenario_to_json(s));
}

std::string scenario_digest(const Scenario& s) {
    const std::string text = scenario_to_json(s);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace uvr
