// io.hpp
//
// File formats and command-line value parsing.
//
// Box files are JSON:
//   {
//     "provenance": "...",
//     "alice_first": { "00": [[p,p],[p,p]], "01": ..., "10": ..., "11": ... },
//     "bob_first":   { same four keys }
//   }
// with the key "<x><y>" selecting the input pair and block row a, column b.
// Probabilities are written with 17 significant digits so a load/store
// round trip is exact.

#pragma once

#include "nlbox/analysis.hpp"
#include "nlbox/experiments.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace nlbox {

/// Malformed input data (files); distinct from bad flag values.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
/// Unparseable flag value; a usage error.
struct SpecError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string format_probability(double p) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    return buf;
}

inline const char* pair_key(int x, int y) {
    static const char* keys[4] = {"00", "01", "10", "11"};
    return keys[2 * x + y];
}

}  // namespace detail

inline std::string box_to_json(const Box<double>& box) {
    std::ostringstream out;
    out << "{\n  \"provenance\": "
        << nlohmann::json(box.provenance).dump() << ",\n";
    const auto emit_order = [&](const char* name,
                                const std::array<JointTable<double>, 4>& tables,
                                bool last) {
        out << "  \"" << name << "\": {\n";
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                const auto& t = tables[Box<double>::index(x, y)];
                out << "    \"" << detail::pair_key(x, y) << "\": [["
                    << detail::format_probability(t(0, 0)) << ", "
                    << detail::format_probability(t(0, 1)) << "], ["
                    << detail::format_probability(t(1, 0)) << ", "
                    << detail::format_probability(t(1, 1)) << "]]"
                    << (2 * x + y < 3 ? "," : "") << "\n";
            }
        out << "  }" << (last ? "" : ",") << "\n";
    };
    emit_order("alice_first", box.alice_first, false);
    emit_order("bob_first", box.bob_first, true);
    out << "}\n";
    return out.str();
}

inline void write_box_json(const Box<double>& box, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << box_to_json(box);
    if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

inline Box<double> parse_box_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("box file is not valid JSON: ") +
                          e.what());
    }
    if (!doc.is_object()) throw FormatError("box file must be a JSON object");

    Box<double> box;
    box.provenance = doc.value("provenance", std::string{});
    const auto read_order = [&](const char* name,
                                std::array<JointTable<double>, 4>& tables) {
        if (!doc.contains(name) || !doc[name].is_object())
            throw FormatError(std::string("missing table group ") + name);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                const char* key = detail::pair_key(x, y);
                if (!doc[name].contains(key))
                    throw FormatError(std::string("missing block ") + name +
                                      "/" + key);
                const auto& block = doc[name][key];
                if (!block.is_array() || block.size() != 2 ||
                    !block[0].is_array() || block[0].size() != 2 ||
                    !block[1].is_array() || block[1].size() != 2)
                    throw FormatError(std::string("block ") + name + "/" +
                                      key + " must be 2x2");
                JointTable<double>& t = tables[Box<double>::index(x, y)];
                double sum = 0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) {
                        if (!block[a][b].is_number())
                            throw FormatError("probabilities must be numbers");
                        const double p = block[a][b].get<double>();
                        if (!std::isfinite(p) || p < -tolerance::report ||
                            p > 1 + tolerance::report)
                            throw FormatError(
                                "probability outside [0,1] in block " +
                                std::string(key));
                        t(a, b) = p;
                        sum += p;
                    }
                if (std::abs(sum - 1) > tolerance::report)
                    throw FormatError("block " + std::string(key) + " of " +
                                      name + " does not sum to 1");
            }
    };
    read_order("alice_first", box.alice_first);
    read_order("bob_first", box.bob_first);
    return box;
}

inline Box<double> read_box_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open box file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_box_json(buf.str());
}

inline nlohmann::ordered_json condition_to_json(
    const ConditionResult<double>& c) {
    return {{"pass", c.pass}, {"max_residual", c.max_residual}};
}

inline nlohmann::ordered_json report_to_json(const CausalityReport<double>& r,
                                             double chsh_alice_first,
                                             double chsh_bob_first,
                                             const std::string& provenance) {
    nlohmann::ordered_json doc;
    doc["provenance"] = provenance;
    doc["tolerance"] = r.tolerance;
    doc["no_signaling_alice_first"] =
        condition_to_json(r.no_signaling_alice_first);
    doc["no_signaling_bob_first"] = condition_to_json(r.no_signaling_bob_first);
    doc["local_measurement"] = condition_to_json(r.local_measurement);
    doc["no_causal_order"] = condition_to_json(r.no_causal_order);
    doc["chsh_alice_first"] = chsh_alice_first;
    doc["chsh_bob_first"] = chsh_bob_first;
    doc["all_pass"] = r.all_pass();
    return doc;
}

inline nlohmann::ordered_json search_result_to_json(
    const ObservableSearchResult<double>& res, const std::string& state_spec,
    const std::string& rule_spec, int restarts, std::uint64_t seed) {
    const auto obs = [](const QubitObservable<double>& o) {
        return nlohmann::ordered_json{{"theta", o.theta()}, {"phi", o.phi()}};
    };
    nlohmann::ordered_json doc;
    doc["state"] = state_spec;
    doc["rule"] = rule_spec;
    doc["restarts"] = restarts;
    doc["seed"] = seed;
    doc["residual"] = res.residual;
    doc["chsh"] = res.chsh;
    doc["observables"] = {
        {"alice", {obs(res.alice[0]), obs(res.alice[1])}},
        {"bob", {obs(res.bob[0]), obs(res.bob[1])}}};
    return doc;
}

/// Parses "born", "power:m=<positive real>" or "step".
inline ProbabilityRule<double> parse_rule_spec(const std::string& spec) {
    if (spec == "born") return ProbabilityRule<double>::born();
    if (spec == "step") return ProbabilityRule<double>::step();
    if (spec.rfind("power:m=", 0) == 0) {
        const std::string num = spec.substr(8);
        char* end = nullptr;
        const double m = std::strtod(num.c_str(), &end);
        if (end == num.c_str() || *end != '\0')
            throw SpecError("cannot parse exponent in rule '" + spec + "'");
        try {
            return ProbabilityRule<double>::power(m);
        } catch (const DomainError& e) {
            throw SpecError(e.what());
        }
    }
    throw SpecError("unknown rule '" + spec +
                    "' (expected born, power:m=<real>, or step)");
}

struct ParsedState {
    TwoQubitState<double> state;
    double input_norm = 1;  // norm of the raw amplitudes before normalizing
};

/// Parses "bell" or four comma-separated re:im amplitude pairs ordered
/// |00>,|01>,|10>,|11>.
inline ParsedState parse_state_spec(const std::string& spec) {
    if (spec == "bell") return {bell_state<double>(), 1.0};

    std::array<std::complex<double>, 4> amps;
    std::stringstream ss(spec);
    std::string item;
    int count = 0;
    while (std::getline(ss, item, ',')) {
        if (count >= 4)
            throw SpecError("state needs exactly 4 amplitudes, got more");
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw SpecError("amplitude '" + item + "' is not re:im");
        char* end = nullptr;
        const std::string re_s = item.substr(0, colon);
        const std::string im_s = item.substr(colon + 1);
        const double re = std::strtod(re_s.c_str(), &end);
        if (end == re_s.c_str() || *end != '\0')
            throw SpecError("bad real part in '" + item + "'");
        const double im = std::strtod(im_s.c_str(), &end);
        if (end == im_s.c_str() || *end != '\0')
            throw SpecError("bad imaginary part in '" + item + "'");
        amps[count++] = {re, im};
    }
    if (count != 4)
        throw SpecError("state needs exactly 4 amplitudes, got " +
                        std::to_string(count));
    Vector4c<double> v;
    v << amps[0], amps[1], amps[2], amps[3];
    const double norm = v.norm();
    return {TwoQubitState<double>(v), norm};
}

/// Parses "chsh" or eight comma-separated angles
/// aTheta0,aPhi0,aTheta1,aPhi1,bTheta0,bPhi0,bTheta1,bPhi1.
inline ChshSetting<double> parse_observables_spec(const std::string& spec) {
    if (spec == "chsh") return chsh_observables<double>();

    std::array<double, 8> angles{};
    std::stringstream ss(spec);
    std::string item;
    int count = 0;
    while (std::getline(ss, item, ',')) {
        if (count >= 8) throw SpecError("observables need exactly 8 angles");
        char* end = nullptr;
        angles[count] = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw SpecError("bad angle '" + item + "'");
        ++count;
    }
    if (count != 8)
        throw SpecError("observables need exactly 8 angles, got " +
                        std::to_string(count));
    try {
        return ChshSetting<double>{
            {QubitObservable<double>(angles[0], angles[1]),
             QubitObservable<double>(angles[2], angles[3])},
            {QubitObservable<double>(angles[4], angles[5]),
             QubitObservable<double>(angles[6], angles[7])}};
    } catch (const DomainError& e) {
        throw SpecError(e.what());
    }
}

}  // namespace nlbox
