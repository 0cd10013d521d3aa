#include "pbrc/config.hpp"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "pbrc/error.hpp"

namespace pbrc {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_integer(std::string_view key, std::string_view value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        fail(ErrorKind::Config, "'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
    }
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    const std::string text(value);
    char* end = nullptr;
    const double out = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        fail(ErrorKind::Config, "'" + std::string(key) + "' expects a number, got '" + text + "'");
    }
    return out;
}

}  // namespace

ReservoirConfig RunConfig::reservoir() const {
    ReservoirConfig r;
    r.n_r = nodes;
    r.alpha = alpha;
    r.rho = rho;
    r.input_scaling = input_scaling;
    r.seed = seed;
    return r;
}

void RunConfig::validate() const {
    reservoir().validate();
    if (!lambda_sweep && !(lambda >= 0.0)) fail(ErrorKind::Config, "lambda must be >= 0");
    if (workers < 1) fail(ErrorKind::Config, "workers must be >= 1");
    if (repeats < 1) fail(ErrorKind::Config, "repeats must be >= 1");
    if (n_brc < 1) fail(ErrorKind::Config, "n_brc must be >= 1");
    if (resample < 0) fail(ErrorKind::Config, "resample must be >= 0");
    if (pooling.washout < 0) fail(ErrorKind::Config, "washout must be >= 0");
    if (ks.empty()) fail(ErrorKind::Config, "ks must list at least one k");
    for (const int k : ks) {
        if (k < 1) fail(ErrorKind::Config, "every k must be >= 1");
    }
}

int parity_nodes(Topology topology, int total_dim, int n_brc) {
    switch (topology) {
        case Topology::Esn: return total_dim;
        case Topology::Brc: return total_dim / 2;
        case Topology::Pbrc: return total_dim / (2 * n_brc);
    }
    return total_dim;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        const std::string_view raw = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;

        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) fail(ErrorKind::Parse, "config line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    while (true) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (!item.empty()) out.push_back(parse_integer<int>("list", item));
        if (comma == std::string_view::npos) break;
        text = text.substr(comma + 1);
    }
    return out;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "topology") {
        config.topology = parse_topology(value);
    } else if (key == "nodes") {
        config.nodes = parse_integer<int>(key, value);
    } else if (key == "alpha") {
        config.alpha = parse_real(key, value);
    } else if (key == "rho") {
        config.rho = parse_real(key, value);
    } else if (key == "input_scaling") {
        config.input_scaling = parse_real(key, value);
    } else if (key == "lambda") {
        config.lambda_sweep = value == "sweep";
        if (!config.lambda_sweep) config.lambda = parse_real(key, value);
    } else if (key == "pooling") {
        config.pooling.policy = parse_pooling(value);
    } else if (key == "washout") {
        config.pooling.washout = parse_integer<int>(key, value);
    } else if (key == "workers") {
        config.workers = parse_integer<int>(key, value);
    } else if (key == "seed") {
        config.seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "repeats") {
        config.repeats = parse_integer<int>(key, value);
    } else if (key == "n_brc") {
        config.n_brc = parse_integer<int>(key, value);
    } else if (key == "resample") {
        config.resample = parse_integer<int>(key, value);
    } else if (key == "ks") {
        config.ks = parse_int_list(value);
    } else {
        fail(ErrorKind::Config, "unknown configuration key '" + std::string(key) + "'");
    }
}

}  // namespace pbrc
