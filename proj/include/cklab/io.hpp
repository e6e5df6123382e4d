// Serialization: trajectory CSV, JSON reports and the key=value config format.
#pragma once

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "diagnostics.hpp"
#include "equilibria.hpp"
#include "series.hpp"
#include "trajectory.hpp"

namespace cklab {

using Json = nlohmann::ordered_json;

/// Shortest text that round-trips is not needed; 17 significant digits is.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// NaN and infinities become strings, since JSON has no literal for them.
inline Json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
    os << "chart,coord,a,b,c,alpha\n";
    const std::string chart(to_string(tr.chart));
    for (const auto& s : tr.samples)
        os << chart << ',' << fmt17(s.t) << ',' << fmt17(s.a) << ',' << fmt17(s.b) << ',' << fmt17(s.c) << ','
           << fmt17(s.alpha) << '\n';
}

inline Json to_json(const State& s) {
    return Json{{"t", num(s.t)}, {"a", num(s.a)}, {"b", num(s.b)}, {"c", num(s.c)}, {"alpha", num(s.alpha)}};
}

inline Json to_json(const GroupSpec& g) {
    Json j{{"tag", to_string(g.tag)}, {"p", {g.p1, g.p2, g.p3}}, {"lambda", g.lambda}};
    if (g.tag == GroupTag::SU2) {
        j["exp_neg_A"] = g.exp_neg_A;
        j["ricci_flat"] = g.ricci_flat();
    }
    return j;
}

inline Json to_json(const Endpoint& e) {
    Json j{{"kind", to_string(e.kind)}, {"value", num(e.value)}, {"t_value", num(e.t_value)},
           {"step_underflow", e.step_underflow}};
    if (e.has_limit) j["limit"] = to_json(e.limit);
    return j;
}

/// Endpoint metadata written next to a trajectory CSV.
inline Json trajectory_sidecar(const Trajectory& tr, const State& seed) {
    Json j;
    j["group"] = to_json(tr.group);
    j["chart"] = to_string(tr.chart);
    j["samples"] = tr.size();
    j["seed"] = to_json(seed);
    j["left"] = to_json(tr.left);
    j["right"] = to_json(tr.right);
    if (!tr.empty() && tr.front().alpha != 0.0) {
        Json fi = Json::object();
        const auto first = first_integrals(tr.group, tr.front());
        const auto last = first_integrals(tr.group, tr.back());
        for (std::size_t k = 0; k < first.size(); ++k) {
            double worst = 0.0;
            for (const auto& s : tr.samples) {
                const double v = first_integrals(tr.group, s)[k].second;
                worst = std::max(worst, std::abs(v - first[k].second) / std::abs(first[k].second));
            }
            fi[first[k].first] = Json{{"first", num(first[k].second)}, {"last", num(last[k].second)}, {"max_rel_drift", num(worst)}};
        }
        j["first_integrals"] = fi;
    }
    return j;
}

inline Json to_json(const Equilibrium& e, const LinearizationReport& lin) {
    Json ev = Json::array();
    for (const auto& z : lin.eigenvalues) ev.push_back(Json{{"re", num(z.real())}, {"im", num(z.imag())}});
    Json dirs = Json::array();
    for (const auto& v : lin.unstable_directions) {
        Json d = Json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) d.push_back(num(v(i)));
        dirs.push_back(d);
    }
    Json params = Json::array();
    for (double p : e.parameters) params.push_back(num(p));
    return Json{{"family", to_string(e.family)},
                {"parameters", params},
                {"point", to_json(e.point)},
                {"eigenvalues", ev},
                {"unstable_values", lin.unstable_values},
                {"unstable_directions", dirs},
                {"degenerate", lin.degenerate}};
}

inline Json to_json(const ExponentFit& f) {
    return Json{{"variable", f.variable},   {"exponent", num(f.exponent)}, {"ci95", num(f.stderr95)},
                {"window", {num(f.window_lo), num(f.window_hi)}}, {"r2", num(f.r2)}, {"reference", num(f.reference)},
                {"points", f.points},       {"accepted", f.accepted()}};
}

inline Json to_json(const DistanceResult& d) {
    Json ws = Json::array(), rs = Json::array();
    for (double w : d.window_sums) ws.push_back(num(w));
    for (double r : d.ratios) rs.push_back(num(r));
    Json j{{"kind", to_string(d.kind)}, {"value", num(d.value)}, {"tail", num(d.tail)}, {"window_sums", ws}, {"ratios", rs}};
    if (d.integrand.points > 0) j["integrand_fit"] = to_json(d.integrand);
    return j;
}

inline Json to_json(const WChartResult& w) {
    Json g = Json::array(), rs = Json::array();
    for (double x : w.growth) g.push_back(num(x));
    for (double x : w.ratios) rs.push_back(num(x));
    return Json{{"kind", to_string(w.kind)}, {"A", num(w.A)},           {"p", num(w.p)},
                {"r2", num(w.r2)},            {"L_upper", num(w.L)},     {"k_fit", num(w.k_fit)},
                {"k_data", num(w.k_data)},    {"k_rel_error", num(w.k_rel_error)},
                {"v_increases", w.v_increases}, {"rho_fit", {num(w.rho_fit_lo), num(w.rho_fit_hi)}},
                {"growth_over_rho", g},       {"window_ratios", rs}};
}

inline Json to_json(const Condition& c) {
    return Json{{"name", c.name}, {"required_form", c.required_form}, {"observed", num(c.observed)}, {"pass", c.pass}, {"uses", c.uses}};
}

inline Json to_json(const SmoothnessReport& r) {
    Json m = Json::array(), k = Json::array();
    for (const auto& c : r.metric_conditions) m.push_back(to_json(c));
    for (const auto& c : r.kahler_conditions) k.push_back(to_json(c));
    return Json{{"orbit_kind", to_string(r.orbit_kind)},
                {"a1", num(r.a1)},
                {"d1", num(r.d1)},
                {"integrality", r.integrality},
                {"integrality_value", num(r.integrality_value)},
                {"integrality_phrasings", r.integrality_phrasings},
                {"metric_conditions", m},
                {"kahler_conditions", k},
                {"metric_pass", r.metric_pass()},
                {"kahler_pass", r.kahler_pass()},
                {"pass", r.pass()}};
}

inline Json to_json(const SeriesSolution& s) {
    const std::array<std::string, 4> names{"a", "b", "c", "alpha"};
    Json coeffs = Json::object(), parity = Json::object();
    for (std::size_t i = 0; i < 4; ++i) {
        Json c = Json::array();
        for (double v : s.coeffs[i]) c.push_back(num(v));
        coeffs[names[i]] = c;
        parity[names[i]] = to_string(s.parity[i]);
    }
    Json fp = Json::array();
    for (const auto& f : s.free_parameters)
        fp.push_back(Json{{"variable", names[static_cast<std::size_t>(f.variable)]}, {"order", f.order}, {"value", num(f.value)}});
    return Json{{"order", s.order},       {"orbit", to_string(s.orbit)}, {"collapsing", s.collapsing},
                {"coefficients", coeffs}, {"parity", parity},            {"free_parameters", fp},
                {"residual", num(s.residual)}};
}

inline Json to_json(const AuditReport& a) {
    Json m = Json::object();
    for (const auto& x : a.monotone) m[x.quantity] = x.violations;
    Json j{{"samples", a.samples}, {"monotone_violations", m}};
    if (a.region_applicable) {
        j["region_violations"] = a.region_violations;
        j["not_case3"] = a.not_case3();
    }
    return j;
}

inline Json to_json(const ClassificationReport& r) {
    Json seed{{"source", to_string(r.spec.source)}, {"state", to_json(r.seed)}};
    if (r.spec.source == SeedSource::UnstableCurve) {
        seed["family"] = to_string(r.spec.family);
        seed["q"] = num(r.spec.q);
        if (r.spec.family == Family::E2_0p0r) seed["r"] = num(r.spec.r);
        seed["epsilon"] = num(r.spec.seed.epsilon);
        seed["weights"] = r.spec.seed.weights;
        seed["second_order"] = r.spec.seed.second_order;
    }
    if (r.spec.source == SeedSource::ClosedForm) seed["c1"] = num(r.spec.c1);
    Json j;
    j["group"] = to_json(r.group);
    j["seed"] = seed;
    j["left_verdict"] = to_string(r.left);
    j["right_verdict"] = to_string(r.right);
    j["overall"] = to_string(r.overall);
    j["reason"] = r.reason;
    j["left_end"] = to_json(r.left_end);
    j["right_end"] = to_json(r.right_end);
    if (r.limit_family) j["limit_family"] = to_string(*r.limit_family);
    if (r.left_distance) j["left_distance"] = to_json(*r.left_distance);
    if (r.right_distance) j["right_distance"] = to_json(*r.right_distance);
    if (r.w_chart) j["right_distance_w_chart"] = to_json(*r.w_chart);
    if (!r.left_blowup.empty()) {
        Json f = Json::array();
        for (const auto& x : r.left_blowup) f.push_back(to_json(x));
        j["left_blowup_fits"] = f;
    }
    if (r.series) j["series"] = to_json(*r.series);
    if (r.smoothness) j["smoothness"] = to_json(*r.smoothness);
    j["audit"] = to_json(r.audit);
    j["first_integral_drift"] = num(r.first_integral_drift);
    j["finite_length_escape"] = r.finite_length_escape;
    j["samples"] = r.samples;
    return j;
}

// ---------------------------------------------------------------- config

/// Flat key=value text. `[name]` starts a section and later keys are stored
/// as "name.key"; keys before any section have no prefix. '#' and ';' start
/// comments, blank lines are ignored.
using ConfigMap = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline ConfigMap parse_config(std::istream& is) {
    ConfigMap out;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (out.count(full)) throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": duplicate key " + full);
        out[full] = value;
    }
    return out;
}

inline ConfigMap parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline void reject_unknown(const ConfigMap& cfg, const std::set<std::string>& known) {
    for (const auto& [k, v] : cfg)
        if (!known.count(k)) throw Error(ErrorCode::InvalidConfig, "unknown key " + k);
}

inline double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidConfig, key + ": not a number: " + v);
    }
    if (pos != v.size()) throw Error(ErrorCode::InvalidConfig, key + ": not a number: " + v);
    return x;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw Error(ErrorCode::InvalidConfig, key + ": expected true or false, got " + v);
}

}  // namespace cklab
