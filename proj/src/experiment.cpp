#include "abrmdp/experiment.hpp"

#include "abrmdp/csv.hpp"
#include "abrmdp/errors.hpp"
#include "abrmdp/mdp.hpp"
#include "abrmdp/policy_io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

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

std::vector<std::string> split_list(const std::string& text)
{
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream in(spaced);
    std::vector<std::string> out;
    std::string token;
    while (in >> token) {
        out.push_back(token);
    }
    return out;
}

Arm parse_arm(const std::string& name)
{
    if (name == "proposed") return Arm::proposed;
    if (name == "myopic") return Arm::myopic;
    if (name == "ideal") return Arm::ideal;
    if (name == "client_centric") return Arm::client_centric;
    throw ConfigError("unknown arm '" + name + "'");
}

std::string sweep_label(const std::optional<double>& v)
{
    return v ? format_double(*v) : std::string("none");
}

ScenarioConfig apply_sweep(const ScenarioConfig& base, SweepAxis axis, std::optional<double> value)
{
    if (!value) {
        return base;
    }
    if (axis == SweepAxis::r_th) {
        return with_r_th(base, *value);
    }
    ScenarioConfig config = base;
    config.session.horizon = static_cast<std::size_t>(*value);
    return config;
}

struct SweepPoint {
    std::optional<double> value;
    ScenarioConfig config;
    std::shared_ptr<const PolicyTable> table;
};

} // namespace

std::string to_string(Arm arm)
{
    switch (arm) {
    case Arm::proposed: return "proposed";
    case Arm::myopic: return "myopic";
    case Arm::ideal: return "ideal";
    case Arm::client_centric: return "client_centric";
    }
    return "?";
}

std::string to_string(SweepAxis axis)
{
    switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::r_th: return "r_th";
    case SweepAxis::horizon: return "horizon";
    }
    return "?";
}

void validate(const ExperimentSpec& spec)
{
    if (spec.arms.empty()) {
        throw ConfigError("experiment needs at least one arm");
    }
    if (spec.sweep == SweepAxis::none) {
        if (!spec.sweep_values.empty()) {
            throw ConfigError("sweep_values given without a sweep axis");
        }
        return;
    }
    if (spec.sweep_values.empty()) {
        throw ConfigError("sweep axis given without sweep_values");
    }
    if (spec.policy_table) {
        throw ConfigError("policy_table cannot be combined with a sweep");
    }
    for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) {
        const double v = spec.sweep_values[i];
        if (!(v > 0.0) || (i > 0 && v <= spec.sweep_values[i - 1])) {
            throw ConfigError("sweep values must be positive and strictly ascending");
        }
        if (spec.sweep == SweepAxis::horizon && v != std::floor(v)) {
            throw ConfigError("horizon sweep values must be integers");
        }
    }
}

ExperimentSpec load_experiment(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open experiment " + path.string());
    }
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("experiment syntax error: ") + e.what());
    }

    const auto base = path.parent_path();
    ExperimentSpec spec;
    const auto scenario = tree.get_optional<std::string>("experiment.scenario");
    if (!scenario) {
        throw ConfigError("missing key 'experiment.scenario'");
    }
    spec.scenario = base / trim(*scenario);
    for (const auto& name : split_list(tree.get<std::string>("experiment.arms", ""))) {
        spec.arms.push_back(parse_arm(name));
    }
    const std::string sweep = trim(tree.get<std::string>("experiment.sweep", "none"));
    if (sweep == "none") {
        spec.sweep = SweepAxis::none;
    } else if (sweep == "r_th") {
        spec.sweep = SweepAxis::r_th;
    } else if (sweep == "horizon") {
        spec.sweep = SweepAxis::horizon;
    } else {
        throw ConfigError("experiment.sweep must be none, r_th or horizon");
    }
    for (const auto& token : split_list(tree.get<std::string>("experiment.sweep_values", ""))) {
        try {
            spec.sweep_values.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw ConfigError("experiment.sweep_values: '" + token + "' is not a number");
        }
    }
    if (const auto seed = tree.get_optional<std::string>("experiment.seed")) {
        try {
            spec.seed = std::stoull(trim(*seed));
        } catch (const std::exception&) {
            throw ConfigError("experiment.seed must be a nonnegative integer");
        }
    }
    if (const auto table = tree.get_optional<std::string>("experiment.policy_table")) {
        spec.policy_table = base / trim(*table);
    }
    const std::string stationary = trim(tree.get<std::string>("experiment.stationary", "false"));
    if (stationary != "true" && stationary != "false") {
        throw ConfigError("experiment.stationary must be true or false");
    }
    spec.stationary = stationary == "true";
    validate(spec);
    return spec;
}

std::vector<CellResult> run_cells(const ExperimentSpec& spec, const ScenarioConfig& base,
                                  const RunOptions& options)
{
    validate(spec);
    ScenarioConfig seeded = base;
    if (options.seed) {
        seeded.session.rng_seed = *options.seed;
    } else if (spec.seed) {
        seeded.session.rng_seed = *spec.seed;
    }
    const bool stationary = options.stationary || spec.stationary;
    const bool needs_table =
        std::find(spec.arms.begin(), spec.arms.end(), Arm::proposed) != spec.arms.end();

    std::vector<SweepPoint> points;
    std::vector<std::optional<double>> values;
    if (spec.sweep == SweepAxis::none) {
        values.emplace_back();
    } else {
        values.assign(spec.sweep_values.begin(), spec.sweep_values.end());
    }
    for (const auto& v : values) {
        SweepPoint point{v, apply_sweep(seeded, spec.sweep, v), nullptr};
        validate(point.config);
        if (needs_table) {
            if (spec.policy_table) {
                auto loaded = load_policy_table(*spec.policy_table);
                if (loaded.fingerprint != policy_fingerprint(point.config)) {
                    throw ConfigError("policy table " + spec.policy_table->string() +
                                      " was solved for a different scenario");
                }
                point.table = std::make_shared<const PolicyTable>(std::move(loaded.table));
            } else {
                point.table = std::make_shared<const PolicyTable>(backward_induction(
                    point.config.model, point.config.session.horizon, {std::max(1u, options.jobs)}));
            }
        }
        points.push_back(std::move(point));
    }

    const std::size_t runs = seeded.session.num_runs;
    const std::size_t arms = spec.arms.size();
    // Layout: [point][arm][run].
    std::vector<std::optional<CellResult>> cells(points.size() * arms * runs);

    auto run_task = [&](std::size_t task) {
        const std::size_t pi = task / runs;
        const std::size_t run = task % runs;
        const auto& point = points[pi];
        const auto channels = realize_channels(point.config, run);
        for (std::size_t ai = 0; ai < arms; ++ai) {
            const Arm arm = spec.arms[ai];
            Policy policy;
            switch (arm) {
            case Arm::proposed: policy = ProposedPolicy{point.table, stationary}; break;
            case Arm::myopic:
            case Arm::client_centric: policy = MyopicPolicy{}; break;
            case Arm::ideal: policy = make_ideal_policy(point.config, channels); break;
            }
            auto trace = run_session(point.config, policy, channels);
            auto summary = summarize(trace, point.config);
            cells[(pi * arms + ai) * runs + run] =
                CellResult{arm, point.value, run, std::move(summary), std::move(trace)};
        }
    };

    const std::size_t tasks = points.size() * runs;
    const std::size_t workers = std::clamp<std::size_t>(options.jobs, 1, tasks);
    if (workers == 1) {
        for (std::size_t task = 0; task < tasks; ++task) {
            run_task(task);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&] {
                    for (std::size_t task = next++; task < tasks; task = next++) {
                        try {
                            run_task(task);
                        } catch (...) {
                            std::lock_guard lock(error_mutex);
                            if (!error) {
                                error = std::current_exception();
                            }
                        }
                    }
                });
            }
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    std::vector<CellResult> out;
    out.reserve(cells.size());
    for (auto& c : cells) {
        out.push_back(std::move(*c));
    }
    return out;
}

std::string summary_csv(const std::vector<CellResult>& cells, SweepAxis axis)
{
    std::string csv;
    if (cells.empty()) {
        return csv;
    }
    std::vector<std::string> header{"arm", "sweep_axis", "sweep_value", "run"};
    for (const auto& f : flatten(cells.front().summary)) {
        header.push_back(f.name);
    }
    csv += csv_row(header);
    for (const auto& c : cells) {
        std::vector<std::string> row{to_string(c.arm), to_string(axis),
                                     c.sweep_value ? format_double(*c.sweep_value) : "",
                                     std::to_string(c.run)};
        for (const auto& f : flatten(c.summary)) {
            row.push_back(format_double(f.value));
        }
        csv += csv_row(row);
    }
    return csv;
}

std::string aggregate_csv(const std::vector<CellResult>& cells, SweepAxis axis)
{
    std::string csv = csv_row({"arm", "sweep_axis", "sweep_value", "field", "mean", "stddev"});
    std::size_t i = 0;
    while (i < cells.size()) {
        std::size_t j = i;
        std::vector<SessionSummary> group;
        while (j < cells.size() && cells[j].arm == cells[i].arm &&
               cells[j].sweep_value == cells[i].sweep_value) {
            group.push_back(cells[j].summary);
            ++j;
        }
        for (const auto& s : aggregate_runs(group)) {
            csv += csv_row({to_string(cells[i].arm), to_string(axis),
                            cells[i].sweep_value ? format_double(*cells[i].sweep_value) : "",
                            s.name, format_double(s.mean), format_double(s.stddev)});
        }
        i = j;
    }
    return csv;
}

std::string trace_csv(const SessionTrace& trace)
{
    std::string csv;
    if (trace.segments.empty()) {
        return csv;
    }
    const std::size_t n = trace.segments.front().users.size();
    std::vector<std::string> header{"epoch"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::string p = "ue" + std::to_string(i + 1) + "_";
        for (const char* col : {"rate_kbps", "channel_state", "raw_bw_kbps", "effective_bw_kbps",
                                "settled_state", "download_s", "rebuffer_s", "played_s",
                                "buffer_s", "income", "buffering_cost", "variation_cost"}) {
            header.push_back(p + col);
        }
    }
    header.insert(header.end(), {"bottleneck_excess_kbps", "bottleneck_cost", "stage_profit"});
    csv += csv_row(header);

    for (const auto& seg : trace.segments) {
        std::vector<std::string> row{std::to_string(seg.epoch)};
        for (const auto& u : seg.users) {
            row.insert(row.end(),
                       {format_double(u.rate_kbps), std::to_string(u.channel_state),
                        format_double(u.raw_bw_kbps), format_double(u.effective_bw_kbps),
                        std::to_string(u.settled_state), format_double(u.download_seconds),
                        format_double(u.rebuffer_seconds), format_double(u.played_seconds),
                        format_double(u.buffer_seconds), format_double(u.profit.income),
                        format_double(u.profit.buffering), format_double(u.profit.variation)});
        }
        row.insert(row.end(), {format_double(seg.bottleneck_excess_kbps),
                               format_double(seg.bottleneck_cost), format_double(seg.stage_profit)});
        csv += csv_row(row);
    }
    return csv;
}

std::vector<CellResult> run_experiment(const ExperimentSpec& spec,
                                       const std::filesystem::path& out_dir,
                                       const RunOptions& options)
{
    const ScenarioConfig base = load_scenario(spec.scenario);
    auto cells = run_cells(spec, base, options);

    std::filesystem::create_directories(out_dir);
    if (options.write_traces) {
        const auto traces = out_dir / "traces";
        std::filesystem::create_directories(traces);
        for (const auto& c : cells) {
            char run[16];
            std::snprintf(run, sizeof run, "%02zu", c.run);
            const auto name = to_string(c.arm) + "_" + sweep_label(c.sweep_value) + "_run" + run + ".csv";
            write_file_atomically(traces / name, trace_csv(c.trace));
        }
    }
    write_file_atomically(out_dir / "summary.csv", summary_csv(cells, spec.sweep));
    write_file_atomically(out_dir / "aggregate.csv", aggregate_csv(cells, spec.sweep));
    return cells;
}

} // namespace abrmdp
