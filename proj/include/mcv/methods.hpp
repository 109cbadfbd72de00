#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <mcv/error.hpp>
#include <mcv/selector.hpp>

namespace mcv {

/// Exponent c in n_c = ceil(n^c), kept as a fraction so configs round-trip exactly.
struct Rational
{
    std::int64_t num = 3;
    std::int64_t den = 4;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }

    static Rational parse(const std::string& text)
    {
        const auto slash = text.find('/');
        try {
            if (slash == std::string::npos) {
                std::size_t used = 0;
                const std::int64_t whole = std::stoll(text, &used);
                if (used != text.size()) throw Error(ErrorCode::BadConfig, "");
                return {whole, 1};
            }
            std::size_t used_num = 0;
            std::size_t used_den = 0;
            const std::string a = text.substr(0, slash);
            const std::string b = text.substr(slash + 1);
            Rational r{std::stoll(a, &used_num), std::stoll(b, &used_den)};
            if (used_num != a.size() || used_den != b.size() || r.den <= 0) throw Error(ErrorCode::BadConfig, "");
            return r;
        } catch (...) {
            throw Error(ErrorCode::BadConfig, "expected a fraction like 3/4, got '" + text + "'");
        }
    }

    bool operator==(const Rational&) const = default;
};

/// ceil(n^c), guarded against rounding when n^c is an integer.
inline Index construction_size(Index n, const Rational& c)
{
    const double v = std::pow(static_cast<double>(n), c.value());
    return static_cast<Index>(std::ceil(v - 1e-9 * v));
}

struct MethodDescriptor
{
    std::string name;
    SelectionCriterion criterion;
    SchemeKind scheme;
    PenaltyKind penalty;
};

/**
 * Method names used in tables and on the command line.
 * m- = Gamma2 (lambda^2 d correction), em- = Gamma1 (exact correction) for
 * the Lasso and Gamma3 (refit error) for elastic net; plain names use Gamma0.
 */
inline const std::vector<MethodDescriptor>& method_catalog()
{
    using C = SelectionCriterion;
    using S = SchemeKind;
    using P = PenaltyKind;
    static const std::vector<MethodDescriptor> catalog{
        {"m-MCCV", C::Gamma2, S::MonteCarlo, P::Lasso},
        {"em-MCCV", C::Gamma1, S::MonteCarlo, P::Lasso},
        {"lse-MCCV", C::Gamma3, S::MonteCarlo, P::Lasso},
        {"MCCV", C::Gamma0, S::MonteCarlo, P::Lasso},
        {"m-K-fold", C::Gamma2, S::KFold, P::Lasso},
        {"em-K-fold", C::Gamma1, S::KFold, P::Lasso},
        {"K-fold", C::Gamma0, S::KFold, P::Lasso},
        {"m-r-K-fold", C::Gamma2, S::ReversedKFold, P::Lasso},
        {"em-r-K-fold", C::Gamma1, S::ReversedKFold, P::Lasso},
        {"r-K-fold", C::Gamma0, S::ReversedKFold, P::Lasso},
        {"AIC", C::AIC, S::KFold, P::Lasso},
        {"BIC", C::BIC, S::KFold, P::Lasso},
        {"EBIC", C::EBIC, S::KFold, P::Lasso},
        {"EN-em-MCCV", C::Gamma3, S::MonteCarlo, P::ElasticNet},
        {"EN-MCCV", C::Gamma0, S::MonteCarlo, P::ElasticNet},
        {"EN-em-K-fold", C::Gamma3, S::KFold, P::ElasticNet},
        {"EN-K-fold", C::Gamma0, S::KFold, P::ElasticNet},
    };
    return catalog;
}

inline const MethodDescriptor& find_method(const std::string& name)
{
    for (const auto& m : method_catalog()) {
        if (m.name == name) return m;
    }
    std::string known;
    for (const auto& m : method_catalog()) known += (known.empty() ? "" : ", ") + m.name;
    throw Error(ErrorCode::InvalidMethod, "unknown method '" + name + "' (known: " + known + ")");
}

struct MethodParams
{
    Rational n_c_exponent{3, 4};
    Rational enet_n_c_exponent{2, 3};
    Index b = 50;
    Index K = 10;
    double alpha = 0.5;
    double ebic_gamma = 1.0;

    bool operator==(const MethodParams&) const = default;
};

/// Concrete method for a dataset of n rows.
inline MethodSpec build_method(const MethodDescriptor& d, Index n, const MethodParams& params)
{
    const PenaltySpec penalty =
        d.penalty == PenaltyKind::Lasso ? PenaltySpec::lasso() : PenaltySpec::elastic_net(params.alpha);
    SplitScheme scheme;
    switch (d.scheme) {
        case SchemeKind::KFold: scheme = SplitScheme::kfold(params.K); break;
        case SchemeKind::ReversedKFold: scheme = SplitScheme::reversed_kfold(params.K); break;
        case SchemeKind::MonteCarlo: {
            const Rational& c = d.penalty == PenaltyKind::Lasso ? params.n_c_exponent : params.enet_n_c_exponent;
            scheme = SplitScheme::monte_carlo(n - construction_size(n, c), params.b);
            break;
        }
    }
    MethodSpec m = MethodSpec::make(d.criterion, scheme, penalty);
    m.ebic_gamma = params.ebic_gamma;
    m.validate();
    return m;
}

} // namespace mcv
