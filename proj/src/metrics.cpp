#include "abrmdp/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace abrmdp {

SessionSummary summarize(const SessionTrace& trace, const ScenarioConfig& config)
{
    if (trace.segments.empty()) {
        throw std::invalid_argument("cannot summarize an empty trace");
    }
    const std::size_t n = trace.segments.front().users.size();
    const double segments = static_cast<double>(trace.segments.size());
    const double content_seconds = segments * config.session.segment_seconds;
    const double delta = config.model.params().delta_kbps;

    SessionSummary out;
    out.users.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double rate_sum = 0.0;
        double stall = 0.0;
        std::size_t stall_events = 0;
        std::size_t jumps = 0;
        for (std::size_t t = 0; t < trace.segments.size(); ++t) {
            const auto& u = trace.segments[t].users[i];
            rate_sum += u.rate_kbps;
            stall += u.rebuffer_seconds;
            if (u.rebuffer_seconds > 0.0) {
                ++stall_events;
            }
            if (t > 0 && std::abs(u.rate_kbps - trace.segments[t - 1].users[i].rate_kbps) >= delta) {
                ++jumps;
            }
        }
        const double session_seconds = stall + content_seconds;
        auto& m = out.users[i];
        m.avg_bitrate_kbps = rate_sum / segments;
        m.buffering_ratio = stall / session_seconds;
        m.stall_events_per_s = static_cast<double>(stall_events) / session_seconds;
        m.stall_frames_per_s = stall * config.session.frames_per_second / session_seconds;
        m.significant_variations = static_cast<double>(jumps);
    }
    for (const auto& seg : trace.segments) {
        out.profit += seg.stage_profit;
    }
    return out;
}

std::vector<NamedValue> flatten(const SessionSummary& summary)
{
    std::vector<NamedValue> out;
    out.push_back({"profit", summary.profit});
    for (std::size_t i = 0; i < summary.users.size(); ++i) {
        const std::string p = "ue" + std::to_string(i + 1) + "_";
        const auto& m = summary.users[i];
        out.push_back({p + "avg_bitrate_kbps", m.avg_bitrate_kbps});
        out.push_back({p + "buffering_ratio", m.buffering_ratio});
        out.push_back({p + "stall_events_per_s", m.stall_events_per_s});
        out.push_back({p + "stall_frames_per_s", m.stall_frames_per_s});
        out.push_back({p + "significant_variations", m.significant_variations});
    }
    return out;
}

std::vector<FieldStats> aggregate_runs(const std::vector<SessionSummary>& summaries)
{
    if (summaries.empty()) {
        throw std::invalid_argument("no summaries to aggregate");
    }
    std::vector<FieldStats> stats;
    for (const auto& f : flatten(summaries.front())) {
        stats.push_back({f.name, 0.0, 0.0});
    }
    const double count = static_cast<double>(summaries.size());
    std::vector<std::vector<NamedValue>> rows;
    rows.reserve(summaries.size());
    for (const auto& s : summaries) {
        rows.push_back(flatten(s));
        if (rows.back().size() != stats.size()) {
            throw std::invalid_argument("summaries have different user counts");
        }
    }
    for (std::size_t f = 0; f < stats.size(); ++f) {
        double sum = 0.0;
        for (const auto& r : rows) {
            sum += r[f].value;
        }
        const double mean = sum / count;
        double ss = 0.0;
        for (const auto& r : rows) {
            ss += (r[f].value - mean) * (r[f].value - mean);
        }
        stats[f].mean = mean;
        stats[f].stddev = summaries.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    }
    return stats;
}

} // namespace abrmdp
