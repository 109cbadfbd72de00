#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <mcv/dataset.hpp>
#include <mcv/error.hpp>

namespace mcv {

enum class SchemeKind { KFold, ReversedKFold, MonteCarlo };

struct SplitScheme
{
    SchemeKind kind = SchemeKind::KFold;
    Index K = 10;    // KFold / ReversedKFold
    Index n_v = 0;   // MonteCarlo
    Index b = 0;     // MonteCarlo

    static SplitScheme kfold(Index K) { return {SchemeKind::KFold, K, 0, 0}; }
    static SplitScheme reversed_kfold(Index K) { return {SchemeKind::ReversedKFold, K, 0, 0}; }
    static SplitScheme monte_carlo(Index n_v, Index b) { return {SchemeKind::MonteCarlo, 0, n_v, b}; }

    bool operator==(const SplitScheme&) const = default;
};

struct SplitPair
{
    IndexSet construction;
    IndexSet validation;
};

struct SplitPlan
{
    SplitScheme scheme;
    std::uint64_t seed = 0;
    Index n = 0;
    std::vector<SplitPair> pairs;

    Index size() const { return static_cast<Index>(pairs.size()); }
};

namespace detail {

inline IndexSet complement(Index n, const IndexSet& sorted_subset)
{
    IndexSet out;
    out.reserve(static_cast<std::size_t>(n) - sorted_subset.size());
    std::size_t k = 0;
    for (Index i = 0; i < n; ++i) {
        if (k < sorted_subset.size() && sorted_subset[k] == i) {
            ++k;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

// Fold f holds perm[f*n/K, (f+1)*n/K), so fold sizes differ by at most one.
inline std::vector<IndexSet> make_folds(Index n, Index K, std::uint64_t seed)
{
    if (K < 2 || K > n) {
        throw Error(ErrorCode::BadK, "K=" + std::to_string(K) + " must satisfy 2 <= K <= n=" + std::to_string(n));
    }
    IndexSet perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<IndexSet> folds(static_cast<std::size_t>(K));
    for (Index f = 0; f < K; ++f) {
        const Index lo = f * n / K;
        const Index hi = (f + 1) * n / K;
        IndexSet fold(perm.begin() + lo, perm.begin() + hi);
        std::sort(fold.begin(), fold.end());
        folds[static_cast<std::size_t>(f)] = std::move(fold);
    }
    return folds;
}

} // namespace detail

inline SplitPlan make_kfold(Index n, Index K, std::uint64_t seed)
{
    SplitPlan plan{SplitScheme::kfold(K), seed, n, {}};
    for (auto& fold : detail::make_folds(n, K, seed)) {
        IndexSet rest = detail::complement(n, fold);
        plan.pairs.push_back({std::move(rest), std::move(fold)});
    }
    return plan;
}

/// Same folds as make_kfold with the same seed: one fold constructs, the other K-1 validate.
inline SplitPlan make_reversed_kfold(Index n, Index K, std::uint64_t seed)
{
    SplitPlan plan{SplitScheme::reversed_kfold(K), seed, n, {}};
    for (auto& fold : detail::make_folds(n, K, seed)) {
        IndexSet rest = detail::complement(n, fold);
        plan.pairs.push_back({std::move(fold), std::move(rest)});
    }
    return plan;
}

/**
 * b independent validation draws of size n_v without replacement.
 * Draws are sequential from one generator, so a plan with fewer repeats
 * is a prefix of a plan with more repeats under the same seed.
 */
inline SplitPlan make_mccv(Index n, Index n_v, Index b, std::uint64_t seed)
{
    if (n_v < 1 || n_v > n - 2 || b < 1) {
        throw Error(ErrorCode::BadSizes, "need 1 <= n_v <= n-2 and b >= 1 (n=" + std::to_string(n) +
                                             ", n_v=" + std::to_string(n_v) + ", b=" + std::to_string(b) + ")");
    }
    SplitPlan plan{SplitScheme::monte_carlo(n_v, b), seed, n, {}};
    std::mt19937_64 rng(seed);
    IndexSet pool(static_cast<std::size_t>(n));
    for (Index r = 0; r < b; ++r) {
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index i = 0; i < n_v; ++i) {
            std::uniform_int_distribution<Index> pick(i, n - 1);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
        }
        IndexSet validation(pool.begin(), pool.begin() + n_v);
        std::sort(validation.begin(), validation.end());
        IndexSet construction = detail::complement(n, validation);
        plan.pairs.push_back({std::move(construction), std::move(validation)});
    }
    return plan;
}

inline SplitPlan make_plan(Index n, const SplitScheme& scheme, std::uint64_t seed)
{
    switch (scheme.kind) {
        case SchemeKind::KFold: return make_kfold(n, scheme.K, seed);
        case SchemeKind::ReversedKFold: return make_reversed_kfold(n, scheme.K, seed);
        case SchemeKind::MonteCarlo: return make_mccv(n, scheme.n_v, scheme.b, seed);
    }
    throw Error(ErrorCode::InvalidMethod, "unknown split scheme");
}

inline std::string scheme_name(SchemeKind kind)
{
    switch (kind) {
        case SchemeKind::KFold: return "KFold";
        case SchemeKind::ReversedKFold: return "ReversedKFold";
        case SchemeKind::MonteCarlo: return "MonteCarlo";
    }
    return "?";
}

// Audit format: one header line, then one line per pair listing the
// 0-based validation indices separated by spaces.
inline void write_split_plan(std::ostream& os, const SplitPlan& plan)
{
    os << "# scheme=" << scheme_name(plan.scheme.kind) << " n=" << plan.n << " K=" << plan.scheme.K
       << " n_v=" << plan.scheme.n_v << " b=" << plan.scheme.b << " seed=" << plan.seed << "\n";
    for (const auto& pair : plan.pairs) {
        for (std::size_t i = 0; i < pair.validation.size(); ++i) {
            if (i) os << ' ';
            os << pair.validation[i];
        }
        os << "\n";
    }
}

inline SplitPlan read_split_plan(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
        throw Error(ErrorCode::ParseError, "split plan: missing header line");
    }
    SplitPlan plan;
    std::istringstream header(line.substr(2));
    std::string token;
    std::string scheme;
    while (header >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "split plan: bad header token " + token);
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "scheme") scheme = value;
        else if (key == "n") plan.n = std::stoll(value);
        else if (key == "K") plan.scheme.K = std::stoll(value);
        else if (key == "n_v") plan.scheme.n_v = std::stoll(value);
        else if (key == "b") plan.scheme.b = std::stoll(value);
        else if (key == "seed") plan.seed = std::stoull(value);
    }
    if (scheme == "KFold") plan.scheme.kind = SchemeKind::KFold;
    else if (scheme == "ReversedKFold") plan.scheme.kind = SchemeKind::ReversedKFold;
    else if (scheme == "MonteCarlo") plan.scheme.kind = SchemeKind::MonteCarlo;
    else throw Error(ErrorCode::ParseError, "split plan: unknown scheme " + scheme);

    while (std::getline(is, line)) {
        std::istringstream row(line);
        IndexSet validation;
        Index v;
        while (row >> v) {
            if (v < 0 || v >= plan.n) throw Error(ErrorCode::ParseError, "split plan: index out of range");
            validation.push_back(v);
        }
        std::sort(validation.begin(), validation.end());
        IndexSet construction = detail::complement(plan.n, validation);
        plan.pairs.push_back({std::move(construction), std::move(validation)});
    }
    return plan;
}

} // namespace mcv
