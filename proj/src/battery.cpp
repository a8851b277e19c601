#include "sdlab/battery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdlab/csv.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::battery {

std::string task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::latency: return "latency";
        case TaskKind::multistage: return "multistage";
        case TaskKind::reconstruction: return "reconstruction";
    }
    return "latency";
}

TaskKind task_kind_from_name(const std::string& name) {
    if (name == "latency") return TaskKind::latency;
    if (name == "multistage") return TaskKind::multistage;
    if (name == "reconstruction") return TaskKind::reconstruction;
    throw argument_error("unknown task kind: " + name);
}

void TaskSpec::validate() const {
    if (!(difficulty > 0.0) || !std::isfinite(difficulty))
        throw argument_error("TaskSpec: difficulty must be positive");
    if (repetitions < 3) throw argument_error("TaskSpec: repetitions must be >= 3");
    if (noise_std < 0.0 || !std::isfinite(noise_std))
        throw argument_error("TaskSpec: noise_std must be >= 0");
}

std::vector<TaskSpec> default_tasks() {
    return {
        {TaskKind::latency, 1.0, 5, 0.01},
        {TaskKind::multistage, 2.0, 5, 0.01},
        {TaskKind::reconstruction, 1.0, 5, 0.01},
    };
}

double base_score(TaskKind kind, double difficulty, double capacity) {
    switch (kind) {
        case TaskKind::latency:
            // Response slows as 1/c; score is the normalized inverse latency.
            return 1.0 / (1.0 + difficulty * (1.0 / capacity - 1.0));
        case TaskKind::multistage:
            // Probability that all `difficulty` stages succeed.
            return std::pow(capacity, difficulty);
        case TaskKind::reconstruction:
            return std::max(0.0, 1.0 - difficulty * (1.0 - capacity));
    }
    return 0.0;
}

BatteryResult administer(const std::vector<TaskSpec>& tasks, const agents::Agent& agent,
                         std::uint64_t seed) {
    if (tasks.empty()) throw argument_error("administer: task list is empty");
    for (const auto& t : tasks) t.validate();

    const double c = agent.capacity();
    Rng rng(seed);

    BatteryResult result;
    result.t_admin = agent.time();
    result.seed = seed;
    double sum = 0.0;
    for (const auto& task : tasks) {
        double base = base_score(task.kind, task.difficulty, c);
        double acc = 0.0;
        for (int r = 0; r < task.repetitions; ++r) {
            double s = base + task.noise_std * rng.next_gaussian();
            acc += std::clamp(s, 0.0, 1.0);
        }
        double score = acc / static_cast<double>(task.repetitions);
        result.task_kinds.push_back(task.kind);
        result.task_scores.push_back(score);
        sum += score;
    }
    result.aggregate = sum / static_cast<double>(tasks.size());
    return result;
}

double degradation(const BatteryResult& baseline, const BatteryResult& post) {
    if (baseline.task_kinds != post.task_kinds)
        throw argument_error("degradation: task lists differ between batteries");
    if (baseline.aggregate == 0.0)
        throw undefined_baseline_error("degradation: baseline aggregate is zero");
    return (baseline.aggregate - post.aggregate) / baseline.aggregate;
}

double rank_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw argument_error("rank_correlation: need two equally sized series");

    auto ranks = [](const std::vector<double>& v) {
        const std::size_t n = v.size();
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // average rank for ties
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };

    std::vector<double> rx = ranks(xs);
    std::vector<double> ry = ranks(ys);
    const auto n = static_cast<double>(xs.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = rx[i] - mx;
        double dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

RecoveryMetrics recovery_metrics(const RecuperationCurve& curve) {
    if (curve.points.size() < 3)
        throw argument_error("recovery_metrics: curve needs >= 3 points");
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (!(curve.points[i].first > curve.points[i - 1].first))
            throw argument_error("recovery_metrics: administration times must strictly increase");

    RecoveryMetrics m;
    const double first = curve.points.front().second;
    const double last = curve.points.back().second;
    if (!(curve.baseline > first)) {
        m.applicable = false;  // nothing was lost; criterion evaluation fails upstream
        return m;
    }
    m.applicable = true;

    std::vector<double> idx(curve.points.size());
    std::vector<double> scores(curve.points.size());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        idx[i] = static_cast<double>(i);
        scores[i] = curve.points[i].second;
    }
    m.trend = rank_correlation(idx, scores);
    m.recovered_fraction = std::clamp((last - first) / (curve.baseline - first), 0.0, 1.5);
    for (const auto& [t, score] : curve.points) {
        if (score >= 0.9 * curve.baseline) {
            m.time_to_90pct = t;
            break;
        }
    }
    return m;
}

std::string battery_results_to_csv(const std::vector<BatteryResult>& slots) {
    CsvBuilder csv("slot,t_admin,task_kind,score,aggregate");
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const auto& b = slots[s];
        for (std::size_t i = 0; i < b.task_scores.size(); ++i) {
            csv.field(static_cast<long long>(s))
                .field(b.t_admin)
                .field(task_kind_name(b.task_kinds[i]))
                .field(b.task_scores[i])
                .field(b.aggregate);
            csv.end_row();
        }
    }
    return csv.text();
}

} // namespace sdlab::battery
