#include "driftlab/config.hpp"

#include "driftlab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace driftlab {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return {};
    }
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream stream(s);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "': '" + value + "' is not a number");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long v = std::stol(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + key + "': '" + value + "' is not an integer");
    }
}

std::uint64_t parse_seed(const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(value, &used, 0);  // base 0: decimal or 0x...
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key 'seed': '" + value + "' is not an unsigned integer");
    }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    for (const std::string& item : split_list(value)) {
        out.push_back(parse_double(key, item));
    }
    if (out.empty()) {
        throw std::invalid_argument("key '" + key + "': empty list");
    }
    return out;
}

Eigen::Index model_dim(const std::string& model_id) {
    if (model_id == "oscillator" || model_id == "pendulum" || model_id == "free_particle") {
        return 2;
    }
    if (model_id == "rigid_body") {
        return 3;
    }
    throw ConfigError(ConfigErrorKind::UnknownKey, "model",
                      "unknown model '" + model_id +
                          "' (expected oscillator, pendulum, rigid_body or free_particle)");
}

long default_samples(Command command) {
    switch (command) {
        case Command::Trace: return 10000;
        case Command::Strong: return 1000;
        case Command::Weak: return 100000;
        case Command::Single: return 1;
    }
    return 1;
}

} // namespace

std::string to_string(Command command) {
    switch (command) {
        case Command::Trace: return "trace";
        case Command::Strong: return "strong";
        case Command::Weak: return "weak";
        case Command::Single: return "single";
    }
    return "unknown";
}

ExperimentConfig parse_config(const std::string& text) {
    static const std::set<std::string> known_keys = {
        "command", "model", "scheme", "sigma", "sigma_row", "initial_value", "h",
        "h_list",  "h_ref", "t_end",  "samples", "seed",    "observable",    "moments",
        "reference_scheme", "output"};

    std::map<std::string, std::string> keys;
    std::vector<std::string> sigma_rows;

    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(ConfigErrorKind::UnknownKey, line,
                              "expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys.count(key)) {
            throw ConfigError(ConfigErrorKind::UnknownKey, key, "unknown key '" + key + "'");
        }
        if (key == "sigma_row") {
            sigma_rows.push_back(value);
        } else {
            keys[key] = value;
        }
    }

    auto require = [&](const std::string& key) -> const std::string& {
        const auto it = keys.find(key);
        if (it == keys.end()) {
            throw ConfigError(ConfigErrorKind::MissingRequired, key,
                              "missing required key '" + key + "'");
        }
        return it->second;
    };

    ExperimentConfig cfg;

    const std::string& command = require("command");
    if (command == "trace") {
        cfg.command = Command::Trace;
    } else if (command == "strong") {
        cfg.command = Command::Strong;
    } else if (command == "weak") {
        cfg.command = Command::Weak;
    } else if (command == "single") {
        cfg.command = Command::Single;
    } else {
        throw ConfigError(ConfigErrorKind::UnknownKey, "command",
                          "unknown command '" + command +
                              "' (expected trace, strong, weak or single)");
    }

    cfg.model_id = require("model");
    const Eigen::Index dim = model_dim(cfg.model_id);

    if (keys.count("scheme")) {
        cfg.schemes.clear();
        for (const std::string& name : split_list(keys["scheme"])) {
            cfg.schemes.push_back(parse_scheme_id(name));
        }
        if (cfg.schemes.empty()) {
            throw std::invalid_argument("key 'scheme': empty list");
        }
    }
    if (cfg.command != Command::Trace && cfg.schemes.size() != 1) {
        throw std::invalid_argument("command '" + to_string(cfg.command) +
                                    "' takes exactly one scheme");
    }

    cfg.sigma_scalar = cfg.model_id == "rigid_body" ? 0.25 : 1.0;
    if (keys.count("sigma")) {
        cfg.sigma_scalar = parse_double("sigma", keys["sigma"]);
    }
    if (!sigma_rows.empty()) {
        if (keys.count("sigma")) {
            throw std::invalid_argument("give either sigma or sigma_row, not both");
        }
        if (cfg.model_id != "rigid_body") {
            throw ConfigError(ConfigErrorKind::DimensionMismatch, "sigma_row",
                              "model '" + cfg.model_id + "' takes a scalar sigma");
        }
        if (static_cast<Eigen::Index>(sigma_rows.size()) != dim) {
            throw ConfigError(ConfigErrorKind::DimensionMismatch, "sigma_row",
                              "model '" + cfg.model_id + "' needs " + std::to_string(dim) +
                                  " sigma rows, got " + std::to_string(sigma_rows.size()));
        }
        std::vector<std::vector<double>> rows;
        for (const std::string& row : sigma_rows) {
            rows.push_back(parse_double_list("sigma_row", row));
        }
        const std::size_t cols = rows.front().size();
        for (const auto& row : rows) {
            if (row.size() != cols) {
                throw ConfigError(ConfigErrorKind::DimensionMismatch, "sigma_row",
                                  "sigma rows must all have the same length");
            }
        }
        if (cols > 3) {
            throw ConfigError(ConfigErrorKind::DimensionMismatch, "sigma_row",
                              "rigid body noise supports at most 3 Wiener components");
        }
        Eigen::MatrixXd sigma(dim, static_cast<Eigen::Index>(cols));
        for (Eigen::Index r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                sigma(r, static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
        cfg.sigma_matrix = sigma;
    }

    if (keys.count("initial_value")) {
        const std::vector<double> values = parse_double_list("initial_value",
                                                             keys["initial_value"]);
        if (static_cast<Eigen::Index>(values.size()) != dim) {
            throw ConfigError(ConfigErrorKind::DimensionMismatch, "initial_value",
                              "model '" + cfg.model_id + "' needs " + std::to_string(dim) +
                                  " components, got " + std::to_string(values.size()));
        }
        cfg.initial_value = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                              static_cast<Eigen::Index>(
                                                                  values.size()));
    }

    cfg.t_end = parse_double("t_end", require("t_end"));

    if (cfg.command == Command::Trace || cfg.command == Command::Single) {
        cfg.h = parse_double("h", require("h"));
    } else {
        cfg.h_list = parse_double_list("h_list", require("h_list"));
        std::sort(cfg.h_list.begin(), cfg.h_list.end(), std::greater<double>());
        if (std::adjacent_find(cfg.h_list.begin(), cfg.h_list.end()) != cfg.h_list.end()) {
            throw std::invalid_argument("key 'h_list': duplicate step sizes");
        }
        if (keys.count("h_ref")) {
            cfg.h_ref = parse_double("h_ref", keys["h_ref"]);
        } else if (cfg.command == Command::Strong) {
            cfg.h_ref = cfg.h_list.back() / 4.0;
        }
    }

    cfg.samples = keys.count("samples") ? parse_long("samples", keys["samples"])
                                        : default_samples(cfg.command);
    if (cfg.samples < 1) {
        throw std::invalid_argument("key 'samples': must be >= 1");
    }
    if (keys.count("seed")) {
        cfg.seed = parse_seed(keys["seed"]);
    }
    if (keys.count("observable")) {
        cfg.observable = parse_observable(keys["observable"]);
    }
    if (keys.count("moments")) {
        cfg.weak_m1 = cfg.weak_m2 = false;
        for (const std::string& m : split_list(keys["moments"])) {
            if (m == "m1") {
                cfg.weak_m1 = true;
            } else if (m == "m2") {
                cfg.weak_m2 = true;
            } else {
                throw std::invalid_argument("key 'moments': expected m1 and/or m2, got '" + m +
                                            "'");
            }
        }
        if (!cfg.weak_m1 && !cfg.weak_m2) {
            throw std::invalid_argument("key 'moments': empty list");
        }
    }
    if (keys.count("reference_scheme")) {
        cfg.reference_scheme = parse_scheme_id(keys["reference_scheme"]);
    } else if (cfg.command == Command::Strong) {
        cfg.reference_scheme = cfg.model_id == "oscillator" ? SchemeId::STM : SchemeId::DP;
    }

    if (keys.count("output")) {
        cfg.output_path = keys["output"];
    } else {
        cfg.output_path = to_string(cfg.command) + "_" + cfg.model_id + "_" +
                          to_string(cfg.schemes.front()) + ".csv";
    }
    return cfg;
}

SystemModel build_model(const ExperimentConfig& config) {
    SystemModel model;
    if (config.model_id == "oscillator") {
        model = make_oscillator(config.sigma_scalar);
    } else if (config.model_id == "pendulum") {
        model = make_pendulum(config.sigma_scalar);
    } else if (config.model_id == "free_particle") {
        model = make_free_particle(config.sigma_scalar);
    } else if (config.model_id == "rigid_body") {
        Eigen::MatrixXd sigma;
        if (config.sigma_matrix) {
            sigma = *config.sigma_matrix;
        } else {
            // Scalar shorthand: noise on the first momentum component only.
            sigma = Eigen::MatrixXd::Zero(3, 1);
            sigma(0, 0) = config.sigma_scalar;
        }
        model = make_rigid_body(sigma);
    } else {
        throw ConfigError(ConfigErrorKind::UnknownKey, "model",
                          "unknown model '" + config.model_id + "'");
    }
    if (config.initial_value) {
        model.initial_value = *config.initial_value;
    }
    return model;
}

} // namespace driftlab
