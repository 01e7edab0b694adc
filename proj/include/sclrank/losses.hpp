#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace sclrank {

enum class RankingLoss { pointwise, pairwise };

inline std::string to_string(RankingLoss l)
{
    return l == RankingLoss::pointwise ? "pointwise" : "pairwise";
}

inline RankingLoss parse_ranking_loss(std::string const& name)
{
    if (name == "pointwise") return RankingLoss::pointwise;
    if (name == "pairwise") return RankingLoss::pairwise;
    throw ConfigError("unknown ranking loss '" + name + "'");
}

struct LossConfig {
    double tau = 0.4;
    double lambda = 0.8;
    double margin = 1.0;
    double clip_eps = 1e-7;
    RankingLoss base = RankingLoss::pointwise;
    /// When false the contrastive term is never evaluated (plain ranking loss).
    bool scl_enabled = true;

    void validate() const
    {
        if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
        if (!(margin >= 0.0)) throw ConfigError("margin must be >= 0");
        if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw ConfigError("clip_eps must be in (0, 0.5)");
    }

    /// Weight actually applied to the contrastive term.
    [[nodiscard]] double scl_weight() const { return scl_enabled ? lambda : 0.0; }

    friend bool operator==(LossConfig const&, LossConfig const&) = default;
};

/// One instance as seen by the losses.
template <typename Real = double>
struct ScoredInstance {
    std::string_view query_id;
    int label = 0;
    Real score = 0;
    std::span<Real const> view;
};

/// A batch of instances plus, for pairwise training, (positive, negative)
/// index pairs into `instances`.
template <typename Real = double>
struct BatchView {
    std::vector<ScoredInstance<Real>> instances;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    [[nodiscard]] std::size_t positives() const
    {
        return static_cast<std::size_t>(std::count_if(
            instances.begin(), instances.end(), [](auto const& i) { return i.label == 1; }));
    }
};

template <typename Real = double>
struct PointwiseResult {
    Real loss = 0;
    std::vector<Real> d_score;
};

/// Mean binary cross-entropy with scores clamped to [clip_eps, 1 - clip_eps].
template <typename Real>
PointwiseResult<Real> pointwise_loss(std::span<ScoredInstance<Real> const> batch,
                                     LossConfig const& cfg)
{
    if (batch.empty()) throw std::invalid_argument("pointwise loss of an empty batch");
    auto const n = static_cast<Real>(batch.size());
    Real const lo = Real(cfg.clip_eps);
    Real const hi = Real(1) - Real(cfg.clip_eps);
    PointwiseResult<Real> out;
    out.d_score.resize(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        auto const y = static_cast<Real>(batch[i].label);
        Real const s = batch[i].score;
        Real const c = std::clamp(s, lo, hi);
        out.loss -= y * std::log(c) + (Real(1) - y) * std::log(Real(1) - c);
        out.d_score[i] = (s < lo || s > hi) ? Real(0) : -(y / c - (Real(1) - y) / (Real(1) - c)) / n;
    }
    out.loss /= n;
    return out;
}

template <typename Real = double>
struct ScorePair {
    Real positive = 0;
    Real negative = 0;
};

template <typename Real = double>
struct PairwiseResult {
    Real loss = 0;
    std::vector<Real> d_positive;
    std::vector<Real> d_negative;
};

/// Mean hinge max(0, m - s+ + s-). The subgradient at the kink is 0.
template <typename Real>
PairwiseResult<Real> pairwise_loss(std::span<ScorePair<Real> const> pairs, LossConfig const& cfg)
{
    if (pairs.empty()) throw std::invalid_argument("pairwise loss of an empty list");
    auto const n = static_cast<Real>(pairs.size());
    PairwiseResult<Real> out;
    out.d_positive.assign(pairs.size(), Real(0));
    out.d_negative.assign(pairs.size(), Real(0));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        Real const slack = Real(cfg.margin) - pairs[i].positive + pairs[i].negative;
        if (slack > Real(0)) {
            out.loss += slack;
            out.d_positive[i] = -Real(1) / n;
            out.d_negative[i] = Real(1) / n;
        }
    }
    out.loss /= n;
    return out;
}

template <typename Real = double>
struct SclResult {
    Real loss = 0;
    std::vector<std::vector<Real>> d_view;
};

/// Supervised contrastive term over the batch.
///
/// For every positive anchor i and every other positive j of the same query,
/// adds -(1/N+) log(exp(v_i.v_j / tau) / sum_{k != i} exp(v_i.v_k / tau)), where
/// N+ is the number of positives in the whole batch. Returns 0 when no such
/// (i, j) exists.
template <typename Real>
SclResult<Real> scl_loss(std::span<ScoredInstance<Real> const> batch, LossConfig const& cfg)
{
    if (!(cfg.tau > 0.0)) throw ConfigError("tau must be > 0");
    auto const n = batch.size();
    if (n < 2) throw std::invalid_argument("contrastive loss needs at least two instances");
    auto const dim = batch[0].view.size();
    for (auto const& inst : batch) {
        if (inst.view.size() != dim) {
            throw std::invalid_argument("contrastive loss: representations differ in dimension");
        }
    }

    SclResult<Real> out;
    out.d_view.assign(n, std::vector<Real>(dim, Real(0)));

    // positives grouped by query
    std::unordered_map<std::string_view, std::vector<std::size_t>> groups;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (batch[i].label == 1) {
            groups[batch[i].query_id].push_back(i);
            ++n_pos;
        }
    }
    bool any_pair = false;
    for (auto const& [q, members] : groups) {
        any_pair = any_pair || members.size() >= 2;
    }
    if (!any_pair) {
        return out;
    }

    Real const inv_tau = Real(1) / Real(cfg.tau);
    Real const inv_pos = Real(1) / static_cast<Real>(n_pos);
    std::vector<Real> sim(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = i; k < n; ++k) {
            Real dot = 0;
            for (std::size_t d = 0; d < dim; ++d) dot += batch[i].view[d] * batch[k].view[d];
            sim[i * n + k] = sim[k * n + i] = dot * inv_tau;
        }
    }

    std::vector<Real> coef(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (batch[i].label != 1) continue;
        auto const& members = groups[batch[i].query_id];
        auto const partners = static_cast<Real>(members.size() - 1);
        if (members.size() < 2) continue;

        Real const* row = &sim[i * n];
        Real peak = -std::numeric_limits<Real>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) peak = std::max(peak, row[k]);
        }
        Real total = 0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) total += std::exp(row[k] - peak);
        }
        Real const lse = peak + std::log(total);

        Real attract = 0;
        for (auto j : members) {
            if (j != i) attract += row[j];
        }
        out.loss += inv_pos * (partners * lse - attract);

        // dL/dsim_ik = (1/N+) (|P(i)| softmax_ik - [k in P(i)])
        for (std::size_t k = 0; k < n; ++k) {
            coef[k] = k == i ? Real(0) : inv_pos * partners * std::exp(row[k] - lse);
        }
        for (auto j : members) {
            if (j != i) coef[j] -= inv_pos;
        }
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || coef[k] == Real(0)) continue;
            Real const c = coef[k] * inv_tau;
            for (std::size_t d = 0; d < dim; ++d) {
                out.d_view[i][d] += c * batch[k].view[d];
                out.d_view[k][d] += c * batch[i].view[d];
            }
        }
    }
    return out;
}

template <typename Real = double>
struct RankingSclResult {
    Real loss = 0;
    Real ranking_loss = 0;
    Real scl_loss = 0;
    std::vector<Real> d_score;
    std::vector<std::vector<Real>> d_view;
};

/// (1 - lambda) * ranking loss + lambda * contrastive loss. A term whose weight
/// is zero is not evaluated.
template <typename Real>
RankingSclResult<Real> ranking_scl(BatchView<Real> const& batch, LossConfig const& cfg)
{
    cfg.validate();
    auto const n = batch.instances.size();
    if (n == 0) throw std::invalid_argument("ranking loss of an empty batch");
    Real const lambda = Real(cfg.scl_weight());
    Real const rank_weight = Real(1) - lambda;
    std::span<ScoredInstance<Real> const> instances(batch.instances);

    RankingSclResult<Real> out;
    out.d_score.assign(n, Real(0));
    out.d_view.assign(n, std::vector<Real>(instances[0].view.size(), Real(0)));

    if (rank_weight != Real(0)) {
        if (cfg.base == RankingLoss::pointwise) {
            auto r = pointwise_loss(instances, cfg);
            out.ranking_loss = r.loss;
            for (std::size_t i = 0; i < n; ++i) out.d_score[i] = rank_weight * r.d_score[i];
        } else {
            if (batch.pairs.empty()) {
                throw std::invalid_argument("pairwise loss requires (positive, negative) pairs");
            }
            std::vector<ScorePair<Real>> scores;
            scores.reserve(batch.pairs.size());
            for (auto [p, q] : batch.pairs) {
                scores.push_back({instances[p].score, instances[q].score});
            }
            auto r = pairwise_loss(std::span<ScorePair<Real> const>(scores), cfg);
            out.ranking_loss = r.loss;
            for (std::size_t k = 0; k < batch.pairs.size(); ++k) {
                out.d_score[batch.pairs[k].first] += rank_weight * r.d_positive[k];
                out.d_score[batch.pairs[k].second] += rank_weight * r.d_negative[k];
            }
        }
        out.loss = rank_weight * out.ranking_loss;
    }
    if (lambda != Real(0)) {
        auto s = scl_loss(instances, cfg);
        out.scl_loss = s.loss;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < s.d_view[i].size(); ++d) {
                out.d_view[i][d] = lambda * s.d_view[i][d];
            }
        }
        out.loss += lambda * out.scl_loss;
    }
    return out;
}

} // namespace sclrank
