#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corpus_io.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace sclrank {

struct EncoderConfig {
    std::size_t hashed_dim = std::size_t{1} << 14;
    std::size_t hidden = 128;
    std::size_t rep_dim = 64;
    std::size_t max_tokens = 512;
    bool normalize_phi = true;
    std::uint64_t init_seed = 0;
    double init_scale = 0.05;

    void validate() const
    {
        if (hashed_dim < 1 || hidden < 1 || rep_dim < 1) {
            throw ConfigError("encoder dimensions must be >= 1");
        }
        if (hashed_dim > (std::size_t{1} << 32)) {
            throw ConfigError("hashed_dim must fit in 32 bits");
        }
        if (max_tokens < 2) throw ConfigError("max_tokens must be >= 2");
        if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
    }

    friend bool operator==(EncoderConfig const&, EncoderConfig const&) = default;
};

/// Guard on the norm used when normalizing the representation.
inline constexpr double phi_norm_epsilon = 1e-12;

/// Sparse, index-sorted input vector.
struct FeatureVector {
    std::size_t dimension = 0;
    std::vector<std::pair<std::uint32_t, double>> entries;

    friend bool operator==(FeatureVector const&, FeatureVector const&) = default;
};

namespace detail {

inline std::uint64_t fnv1a(char ns, std::string_view token)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<unsigned char>(ns));
    mix(0x1f);
    for (char c : token) {
        mix(static_cast<unsigned char>(c));
    }
    return h;
}

} // namespace detail

/// Joint (query, document) feature map over a hashed space.
///
/// The token stream is the query tokens, one separator, then document tokens,
/// cut at max_tokens. Namespaces: Q (query unigram counts), D (document unigram
/// counts) and M (for each distinct query token found in the document, its
/// document term frequency, plus two query-independent match totals: summed
/// matched frequency and number of distinct matched query tokens). The result
/// is L2-normalized.
inline FeatureVector featurize(Query const& q, Document const& d, EncoderConfig const& cfg)
{
    FeatureVector fv;
    fv.dimension = cfg.hashed_dim;
    auto const budget = cfg.max_tokens - 1; // one slot for the separator
    auto const n_query = std::min(q.tokens.size(), budget);
    auto doc_budget = budget - n_query;

    std::unordered_map<std::uint64_t, double> acc;
    auto bucket = [&](char ns, std::string_view tok) {
        return detail::fnv1a(ns, tok) % cfg.hashed_dim;
    };

    std::unordered_map<std::string_view, int> query_tf;
    for (std::size_t i = 0; i < n_query; ++i) {
        acc[bucket('q', q.tokens[i])] += 1.0;
        ++query_tf[q.tokens[i]];
    }
    std::unordered_map<std::string_view, int> doc_tf;
    for (auto const& s : d.sentences) {
        if (doc_budget == 0) break;
        for (auto const& t : s.tokens) {
            if (doc_budget == 0) break;
            --doc_budget;
            acc[bucket('d', t)] += 1.0;
            if (query_tf.contains(t)) {
                ++doc_tf[t];
            }
        }
    }
    double matched_tf = 0.0;
    double matched_distinct = 0.0;
    // iterate in query order so the accumulation order is deterministic
    for (std::size_t i = 0; i < n_query; ++i) {
        auto const& t = q.tokens[i];
        auto it = doc_tf.find(t);
        if (it == doc_tf.end() || it->second == 0) continue;
        acc[bucket('m', t)] += it->second;
        matched_tf += it->second;
        matched_distinct += 1.0;
        it->second = 0; // count each distinct token once
    }
    if (matched_distinct > 0.0) {
        acc[bucket('m', "\x01tf")] += matched_tf;
        acc[bucket('m', "\x01distinct")] += matched_distinct;
    }

    fv.entries.reserve(acc.size());
    for (auto const& [idx, v] : acc) {
        fv.entries.emplace_back(static_cast<std::uint32_t>(idx), v);
    }
    std::sort(fv.entries.begin(), fv.entries.end());
    double sq = 0.0;
    for (auto const& e : fv.entries) sq += e.second * e.second;
    if (sq > 0.0) {
        double const inv = 1.0 / std::sqrt(sq);
        for (auto& e : fv.entries) e.second *= inv;
    }
    return fv;
}

/// Trainable weights. Matrices are row-major.
template <typename Real = double>
struct BasicModelParams {
    std::size_t hashed_dim = 0;
    std::size_t hidden = 0;
    std::size_t rep_dim = 0;
    std::vector<Real> w1;      ///< hashed_dim x hidden
    std::vector<Real> b1;      ///< hidden
    std::vector<Real> w2;      ///< hidden x rep_dim
    std::vector<Real> b2;      ///< rep_dim
    std::vector<Real> w_score; ///< rep_dim
    std::vector<Real> b_score; ///< 1

    BasicModelParams() = default;
    BasicModelParams(std::size_t H, std::size_t h, std::size_t t)
        : hashed_dim(H), hidden(h), rep_dim(t), w1(H * h), b1(h), w2(h * t), b2(t), w_score(t),
          b_score(1)
    {
    }

    [[nodiscard]] static BasicModelParams zeros_like(BasicModelParams const& p)
    {
        return BasicModelParams(p.hashed_dim, p.hidden, p.rep_dim);
    }

    std::array<std::span<Real>, 6> arrays() { return {w1, b1, w2, b2, w_score, b_score}; }
    std::array<std::span<Real const>, 6> arrays() const
    {
        return {w1, b1, w2, b2, w_score, b_score};
    }

    static constexpr std::array<char const*, 6> array_names{"w1", "b1", "w2", "b2", "w_score",
                                                           "b_score"};

    [[nodiscard]] std::size_t parameter_count() const
    {
        std::size_t n = 0;
        for (auto a : arrays()) n += a.size();
        return n;
    }

    [[nodiscard]] bool same_shape(BasicModelParams const& o) const
    {
        return hashed_dim == o.hashed_dim && hidden == o.hidden && rep_dim == o.rep_dim;
    }

    template <typename Other>
    [[nodiscard]] BasicModelParams<Other> cast() const
    {
        BasicModelParams<Other> out(hashed_dim, hidden, rep_dim);
        auto dst = out.arrays();
        auto src = arrays();
        for (std::size_t a = 0; a < src.size(); ++a) {
            std::transform(src[a].begin(), src[a].end(), dst[a].begin(),
                           [](Real v) { return static_cast<Other>(v); });
        }
        return out;
    }

    friend bool operator==(BasicModelParams const&, BasicModelParams const&) = default;
};

using ModelParams = BasicModelParams<double>;

/// Weights uniform in [-init_scale, init_scale] from init_seed; biases zero.
inline ModelParams init_params(EncoderConfig const& cfg)
{
    cfg.validate();
    ModelParams p(cfg.hashed_dim, cfg.hidden, cfg.rep_dim);
    Rng rng(cfg.init_seed);
    for (auto* w : {&p.w1, &p.w2, &p.w_score}) {
        for (auto& v : *w) {
            v = rng.uniform_real(-cfg.init_scale, cfg.init_scale);
        }
    }
    return p;
}

/// Activations of one forward pass, kept for the backward pass.
template <typename Real = double>
struct BasicForwardRecord {
    FeatureVector const* input = nullptr;
    std::vector<Real> pre;      ///< W1^T x + b1
    std::vector<Real> hidden;   ///< relu(pre)
    std::vector<Real> phi;      ///< representation
    std::vector<Real> phi_unit; ///< phi / max(|phi|, eps); empty when normalization is off
    Real phi_norm = 0;
    Real logit = 0;
    Real score = 0;             ///< sigmoid(logit), strictly inside (0, 1)
    bool saturated = false;

    /// The representation fed to the contrastive term.
    [[nodiscard]] std::span<Real const> view() const
    {
        return phi_unit.empty() ? std::span<Real const>(phi) : std::span<Real const>(phi_unit);
    }
};

using ForwardRecord = BasicForwardRecord<double>;

/// Logits are clamped to this magnitude so the score never rounds to 0 or 1.
inline constexpr double logit_limit = 35.0;

namespace detail {

template <typename Real>
void require_finite(std::span<Real const> values, char const* layer)
{
    for (auto v : values) {
        if (!std::isfinite(static_cast<double>(v))) {
            throw NumericError(std::string("non-finite value in ") + layer + " layer");
        }
    }
}

} // namespace detail

/// hidden = relu(W1^T x + b1); phi = W2^T hidden + b2; score = sigmoid(w . phi + b).
/// `x` must outlive the record.
template <typename Real>
BasicForwardRecord<Real> forward(BasicModelParams<Real> const& p, FeatureVector const& x,
                                 bool normalize_phi)
{
    if (x.dimension != p.hashed_dim) {
        throw std::invalid_argument("feature dimension " + std::to_string(x.dimension) +
                                    " does not match model input " +
                                    std::to_string(p.hashed_dim));
    }
    BasicForwardRecord<Real> r;
    r.input = &x;
    auto const h = p.hidden;
    auto const t = p.rep_dim;
    r.pre.assign(p.b1.begin(), p.b1.end());
    for (auto const& [idx, v] : x.entries) {
        auto const* row = &p.w1[static_cast<std::size_t>(idx) * h];
        auto const rv = static_cast<Real>(v);
        for (std::size_t j = 0; j < h; ++j) {
            r.pre[j] += rv * row[j];
        }
    }
    r.hidden.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
        r.hidden[j] = r.pre[j] > Real(0) ? r.pre[j] : Real(0);
    }
    detail::require_finite<Real>(r.hidden, "hidden");

    r.phi.assign(p.b2.begin(), p.b2.end());
    for (std::size_t j = 0; j < h; ++j) {
        if (r.hidden[j] == Real(0)) continue;
        auto const* row = &p.w2[j * t];
        for (std::size_t k = 0; k < t; ++k) {
            r.phi[k] += r.hidden[j] * row[k];
        }
    }
    detail::require_finite<Real>(r.phi, "representation");

    Real sq = 0;
    Real z = p.b_score[0];
    for (std::size_t k = 0; k < t; ++k) {
        sq += r.phi[k] * r.phi[k];
        z += p.w_score[k] * r.phi[k];
    }
    r.phi_norm = std::sqrt(sq);
    if (normalize_phi) {
        Real const denom = std::max(r.phi_norm, Real(phi_norm_epsilon));
        r.phi_unit.resize(t);
        for (std::size_t k = 0; k < t; ++k) {
            r.phi_unit[k] = r.phi[k] / denom;
        }
    }
    if (!std::isfinite(static_cast<double>(z))) {
        throw NumericError("non-finite value in score layer");
    }
    r.logit = z;
    Real const limit = Real(logit_limit);
    r.saturated = z > limit || z < -limit;
    Real const zc = std::clamp(z, -limit, limit);
    r.score = Real(1) / (Real(1) + std::exp(-zc));
    return r;
}

template <typename Real>
BasicForwardRecord<Real> forward(BasicModelParams<Real> const& p, FeatureVector const& x,
                                 EncoderConfig const& cfg)
{
    return forward(p, x, cfg.normalize_phi);
}

/// Accumulates into `grads` the exact parameter gradient of a loss whose
/// derivatives with respect to each record's score and representation view
/// (phi_unit when normalization is on, phi otherwise) are given.
template <typename Real>
void backward(BasicModelParams<Real> const& p, std::span<BasicForwardRecord<Real> const> records,
              std::span<Real const> d_score, std::span<std::vector<Real> const> d_view,
              BasicModelParams<Real>& grads)
{
    if (records.size() != d_score.size() || records.size() != d_view.size()) {
        throw std::invalid_argument("backward: records and upstream gradients differ in length");
    }
    if (!grads.same_shape(p)) {
        throw std::invalid_argument("backward: gradient buffer shape differs from parameters");
    }
    auto const h = p.hidden;
    auto const t = p.rep_dim;
    std::vector<Real> d_phi(t);
    std::vector<Real> d_pre(h);
    for (std::size_t n = 0; n < records.size(); ++n) {
        auto const& r = records[n];
        if (d_view[n].size() != t) {
            throw std::invalid_argument("backward: representation gradient has wrong dimension");
        }
        if (!std::isfinite(static_cast<double>(d_score[n]))) {
            throw NumericError("non-finite upstream score gradient");
        }
        // through the normalization
        if (!r.phi_unit.empty()) {
            if (r.phi_norm > Real(phi_norm_epsilon)) {
                Real proj = 0;
                for (std::size_t k = 0; k < t; ++k) proj += r.phi_unit[k] * d_view[n][k];
                for (std::size_t k = 0; k < t; ++k) {
                    d_phi[k] = (d_view[n][k] - r.phi_unit[k] * proj) / r.phi_norm;
                }
            } else {
                for (std::size_t k = 0; k < t; ++k) {
                    d_phi[k] = d_view[n][k] / Real(phi_norm_epsilon);
                }
            }
        } else {
            std::copy(d_view[n].begin(), d_view[n].end(), d_phi.begin());
        }
        // through the score head
        Real const d_logit = r.saturated ? Real(0) : d_score[n] * r.score * (Real(1) - r.score);
        grads.b_score[0] += d_logit;
        for (std::size_t k = 0; k < t; ++k) {
            grads.w_score[k] += d_logit * r.phi[k];
            d_phi[k] += d_logit * p.w_score[k];
            grads.b2[k] += d_phi[k];
        }
        // representation layer
        for (std::size_t j = 0; j < h; ++j) {
            Real acc = 0;
            auto const* row = &p.w2[j * t];
            auto* grow = &grads.w2[j * t];
            for (std::size_t k = 0; k < t; ++k) {
                grow[k] += r.hidden[j] * d_phi[k];
                acc += row[k] * d_phi[k];
            }
            d_pre[j] = r.pre[j] > Real(0) ? acc : Real(0);
            grads.b1[j] += d_pre[j];
        }
        // hidden layer, only rows touched by the sparse input
        for (auto const& [idx, v] : r.input->entries) {
            auto* grow = &grads.w1[static_cast<std::size_t>(idx) * h];
            auto const rv = static_cast<Real>(v);
            for (std::size_t j = 0; j < h; ++j) {
                grow[j] += rv * d_pre[j];
            }
        }
    }
}

} // namespace sclrank
