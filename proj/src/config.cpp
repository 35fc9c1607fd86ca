#include "abrmdp/config.hpp"

#include "abrmdp/csv.hpp"
#include "abrmdp/errors.hpp"
#include "abrmdp/mdp.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace abrmdp {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string s)
{
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

double parse_number(const std::string& token, const std::string& key)
{
    const std::string t = trim(token);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key + ": '" + t + "' is not a number");
    }
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key)
{
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream in(spaced);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        out.push_back(parse_number(token, key));
    }
    return out;
}

std::vector<std::vector<double>> parse_matrix(const std::string& text, const std::string& key)
{
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string row;
    while (std::getline(in, row, ';')) {
        if (!trim(row).empty()) {
            rows.push_back(parse_list(row, key));
        }
    }
    return rows;
}

std::string require(const pt::ptree& tree, const std::string& key)
{
    const auto value = tree.get_optional<std::string>(key);
    if (!value) {
        throw ConfigError("missing key '" + key + "'");
    }
    return trim(*value);
}

double require_number(const pt::ptree& tree, const std::string& key)
{
    return parse_number(require(tree, key), key);
}

std::size_t require_count(const pt::ptree& tree, const std::string& key)
{
    const double v = require_number(tree, key);
    if (!(v >= 0.0) || v != std::floor(v)) {
        throw ConfigError(key + " must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v);
}

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace

RawScenario parse_scenario(std::istream& in)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("scenario syntax error: ") + e.what());
    }

    RawScenario raw;
    raw.rates_kbps = parse_list(require(tree, "ladder.rates_kbps"), "ladder.rates_kbps");
    raw.transition = parse_matrix(require(tree, "channel.transition"), "channel.transition");
    raw.state_bandwidth_kbps =
        parse_list(require(tree, "channel.state_bandwidth_kbps"), "channel.state_bandwidth_kbps");
    raw.boundaries_kbps =
        parse_list(tree.get<std::string>("channel.boundaries_kbps", ""), "channel.boundaries_kbps");

    auto& p = raw.profit;
    p.alpha = require_number(tree, "profit.alpha");
    p.beta = require_number(tree, "profit.beta");
    p.gamma = require_number(tree, "profit.gamma");
    p.delta_kbps = require_number(tree, "profit.delta_kbps");
    const std::string theta = require(tree, "profit.theta");
    if (theta == "inf" || theta == "infinite" || theta == "infinity") {
        p.theta.reset();
    } else {
        p.theta = parse_number(theta, "profit.theta");
    }
    p.r_th_kbps = require_number(tree, "profit.r_th_kbps");
    p.lambdas = parse_list(require(tree, "profit.lambdas"), "profit.lambdas");
    const std::string variation = tree.get<std::string>("profit.variation_penalty", "symmetric");
    if (trim(variation) == "symmetric") {
        p.variation_penalty = VariationPenalty::symmetric;
    } else if (trim(variation) == "downward_only") {
        p.variation_penalty = VariationPenalty::downward_only;
    } else {
        throw ConfigError("profit.variation_penalty must be symmetric or downward_only");
    }

    auto& s = raw.session;
    s.num_users = require_count(tree, "session.num_users");
    s.horizon = require_count(tree, "session.horizon");
    s.segment_seconds = require_number(tree, "session.segment_seconds");
    s.frames_per_second = require_number(tree, "session.frames_per_second");
    s.initial_buffer_frames = require_number(tree, "session.initial_buffer_frames");
    s.initial_rate_index = require_count(tree, "session.initial_rate_index");
    s.num_runs = require_count(tree, "session.num_runs");
    s.rng_seed = static_cast<std::uint64_t>(require_count(tree, "session.rng_seed"));
    const std::string sharing = require(tree, "session.sharing_mode");
    if (sharing == "proportional") {
        s.sharing_mode = SharingMode::proportional;
    } else if (sharing == "none") {
        s.sharing_mode = SharingMode::none;
    } else {
        throw ConfigError("session.sharing_mode must be proportional or none");
    }
    return raw;
}

RawScenario read_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario " + path.string());
    }
    return parse_scenario(in);
}

ScenarioConfig build_scenario(const RawScenario& raw)
{
    ScenarioConfig config{
        ProfitModel(QualityLadder(raw.rates_kbps),
                    ChannelModel(raw.transition, raw.state_bandwidth_kbps, raw.boundaries_kbps),
                    raw.profit),
        raw.session};
    validate(config);
    return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
    return build_scenario(read_scenario_file(path));
}

ScenarioConfig with_r_th(const ScenarioConfig& config, double r_th_kbps)
{
    ProfitParams params = config.model.params();
    params.r_th_kbps = r_th_kbps;
    return ScenarioConfig{
        ProfitModel(config.model.ladder(), config.model.channel(), std::move(params),
                    config.model.constants().log_base),
        config.session};
}

std::uint64_t policy_fingerprint(const ScenarioConfig& config)
{
    const auto& m = config.model;
    const auto& p = m.params();
    std::string text = "ladder";
    for (double r : m.ladder().rates()) {
        text += ' ' + format_double(r);
    }
    text += "\nchannel";
    for (std::size_t i = 0; i < m.channel().num_states(); ++i) {
        for (double x : m.channel().row(i)) {
            text += ' ' + format_double(x);
        }
        text += " bw " + format_double(m.channel().bandwidth(i));
    }
    for (double b : m.channel().boundaries()) {
        text += ' ' + format_double(b);
    }
    text += "\nprofit " + format_double(p.alpha) + ' ' + format_double(p.beta) + ' ' +
            format_double(p.gamma) + ' ' + format_double(p.delta_kbps) + ' ' +
            (p.theta ? format_double(*p.theta) : std::string("inf")) + ' ' +
            format_double(p.r_th_kbps) + ' ' +
            (p.variation_penalty == VariationPenalty::symmetric ? "sym" : "down");
    for (double l : p.lambdas) {
        text += ' ' + format_double(l);
    }
    text += "\nN " + std::to_string(config.session.num_users) + " T " +
            std::to_string(config.session.horizon) + '\n';
    return fnv1a(text);
}

ValidationReport validate_scenario(const RawScenario& raw)
{
    ValidationReport report;
    auto attempt = [&](const std::string& what, auto&& fn) {
        try {
            fn();
            return true;
        } catch (const std::exception& e) {
            report.failures.push_back(what + ": " + e.what());
            return false;
        }
    };

    std::optional<QualityLadder> ladder;
    std::optional<ChannelModel> channel;
    attempt("ladder", [&] { ladder.emplace(raw.rates_kbps); });
    attempt("channel", [&] {
        channel.emplace(raw.transition, raw.state_bandwidth_kbps, raw.boundaries_kbps);
    });
    attempt("profit", [&] { validate(raw.profit, raw.session.num_users); });
    if (!report.ok()) {
        return report;
    }

    std::optional<ScenarioConfig> config;
    if (!attempt("session", [&] { config.emplace(build_scenario(raw)); })) {
        return report;
    }

    const auto& c = config->model.constants();
    report.details.push_back("eta_play = " + format_double(c.eta_play));
    report.details.push_back("eta_buf = " + format_double(c.eta_buf));
    report.details.push_back("eta_var = " + format_double(c.eta_var));
    report.details.push_back("delta_min_kbps = " +
                             (c.delta_min_kbps ? format_double(*c.delta_min_kbps)
                                               : std::string("none (no rate exceeds any state bandwidth)")));
    std::string pi = "stationary distribution =";
    for (double x : config->model.channel().stationary_distribution()) {
        pi += ' ' + format_double(x);
    }
    report.details.push_back(pi);

    attempt("state space", [&] {
        const StateSpace space(ladder->size(), channel->num_states(), raw.session.num_users);
        report.details.push_back("states = " + std::to_string(space.num_states()));
    });
    attempt("actions", [&] {
        const auto actions = feasible_actions(raw.session.num_users, *ladder, raw.profit);
        report.details.push_back("feasible actions = " + std::to_string(actions.size()));
    });
    return report;
}

} // namespace abrmdp
