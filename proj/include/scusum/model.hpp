#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "scusum/errors.hpp"
#include "scusum/linalg.hpp"
#include "scusum/mat.hpp"
#include "scusum/rng.hpp"

namespace scusum {

// N(0, sigma2 * I_k + U diag(lambdas) U^T). d = 0 (empty basis) is pure noise.
struct SpikedCovariance {
    std::size_t k = 0;
    double sigma2 = 1.0;
    Mat basis;    // k x d, orthonormal columns
    Vec lambdas;  // length d, positive, non-increasing

    std::size_t rank() const { return lambdas.size(); }

    static SpikedCovariance noise(std::size_t k, double sigma2) {
        SpikedCovariance m;
        m.k = k;
        m.sigma2 = sigma2;
        return m;
    }

    void validate() const {
        if (k == 0) throw InvalidInput("SpikedCovariance: k must be positive");
        if (!(sigma2 > 0.0)) throw InvalidInput("SpikedCovariance: sigma2 must be positive");
        if (rank() > 0) {
            if (basis.rows() != k || basis.cols() != rank())
                throw InvalidInput("SpikedCovariance: basis shape mismatch");
            for (std::size_t i = 0; i < rank(); ++i) {
                if (!(lambdas[i] > 0.0)) throw InvalidInput("SpikedCovariance: lambdas must be positive");
                if (i > 0 && lambdas[i] > lambdas[i - 1] + 1e-12)
                    throw InvalidInput("SpikedCovariance: lambdas must be non-increasing");
            }
        }
    }

    // full k x k covariance matrix (test/diagnostic use)
    Mat covariance() const {
        Mat c(k, k);
        for (std::size_t i = 0; i < k; ++i) c(i, i) = sigma2;
        for (std::size_t j = 0; j < rank(); ++j) {
            const Vec u = basis.col(j);
            add_outer(c, u, lambdas[j]);
        }
        return c;
    }
};

// rho_i = lambda_i / sigma2
inline Vec snr(const SpikedCovariance& model) {
    Vec rho(model.rank());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = model.lambdas[i] / model.sigma2;
    return rho;
}

// x = sigma * g + U Lambda^{1/2} h with g ~ N(0, I_k), h ~ N(0, I_d).
// O(k d) per draw; exact covariance sigma2 I + U Lambda U^T.
inline void sample(const SpikedCovariance& model, Rng& rng, Vec& out) {
    const double sigma = std::sqrt(model.sigma2);
    out.assign(model.k, 0.0);
    for (std::size_t i = 0; i < model.k; ++i) out[i] = sigma * rng.normal();
    for (std::size_t j = 0; j < model.rank(); ++j) {
        const double hj = std::sqrt(model.lambdas[j]) * rng.normal();
        for (std::size_t i = 0; i < model.k; ++i) out[i] += hj * model.basis(i, j);
    }
}

inline Vec sample(const SpikedCovariance& model, Rng& rng) {
    Vec x;
    sample(model, rng, x);
    return x;
}

inline constexpr std::uint64_t TAU_INFINITY = std::numeric_limits<std::uint64_t>::max();

// Samples 1..tau come from `pre`, samples tau+1.. from `post`.
// tau = 0 is pure post-change, tau = TAU_INFINITY pure pre-change.
struct ChangeScenario {
    SpikedCovariance pre;
    SpikedCovariance post;
    std::uint64_t tau = TAU_INFINITY;

    void validate() const {
        pre.validate();
        post.validate();
        if (pre.k != post.k) throw InvalidInput("ChangeScenario: pre/post dimension mismatch");
    }
};

// Lazy, unbounded, single-consumer sample stream. Identical (scenario, seed)
// pairs yield identical sequences; the pre-change prefix of a finite-tau
// stream coincides with the tau = infinity stream under the same seed.
class SeededStream {
  public:
    SeededStream(ChangeScenario scenario, std::uint64_t seed)
        : scenario_(std::move(scenario)), rng_(seed), seed_(seed) {
        scenario_.validate();
    }

    const Vec& next() {
        ++cursor_;
        const SpikedCovariance& m = cursor_ <= scenario_.tau ? scenario_.pre : scenario_.post;
        sample(m, rng_, current_);
        return current_;
    }

    std::uint64_t cursor() const { return cursor_; }
    std::uint64_t seed() const { return seed_; }
    const ChangeScenario& scenario() const { return scenario_; }
    std::size_t dim() const { return scenario_.pre.k; }

  private:
    ChangeScenario scenario_;
    Rng rng_;
    std::uint64_t seed_;
    std::uint64_t cursor_ = 0;
    Vec current_;
};

inline SeededStream stream(const ChangeScenario& scenario, std::uint64_t seed) {
    return SeededStream(scenario, seed);
}

inline constexpr std::uint64_t DEFAULT_BASIS_SEED = 0x5eedba5e;

// The four synthetic post-change configurations used throughout the
// experiments. Pre-change is always N(0, sigma2 I_k).
//  - rank1-dense:      u = (1/sqrt(k))(1,..,1)^T, single spike `lambda`
//  - rank1-sparse:     u = e_1, single spike `lambda`
//  - rankd-uniform:    Lambda = lambda I_d, seeded Haar basis
//  - rankd-nonuniform: Lambda = diag(linspace(2, 1, d)), seeded Haar basis
inline ChangeScenario scenario_library(std::string_view name, std::size_t k, std::size_t d,
                                       double sigma2, double lambda = 1.0,
                                       std::uint64_t tau = TAU_INFINITY,
                                       std::uint64_t basis_seed = DEFAULT_BASIS_SEED) {
    ChangeScenario s;
    s.pre = SpikedCovariance::noise(k, sigma2);
    s.post.k = k;
    s.post.sigma2 = sigma2;
    s.tau = tau;
    if (name == "rank1-dense") {
        Mat u(k, 1);
        for (std::size_t i = 0; i < k; ++i) u(i, 0) = 1.0 / std::sqrt(static_cast<double>(k));
        s.post.basis = u;
        s.post.lambdas = {lambda};
    } else if (name == "rank1-sparse") {
        Mat u(k, 1);
        u(0, 0) = 1.0;
        s.post.basis = u;
        s.post.lambdas = {lambda};
    } else if (name == "rankd-uniform") {
        if (d == 0 || d > k) throw InvalidInput("scenario_library: need 1 <= d <= k");
        s.post.basis = random_semi_orthogonal(k, d, basis_seed);
        s.post.lambdas.assign(d, lambda);
    } else if (name == "rankd-nonuniform") {
        if (d == 0 || d > k) throw InvalidInput("scenario_library: need 1 <= d <= k");
        s.post.basis = random_semi_orthogonal(k, d, basis_seed);
        s.post.lambdas.resize(d);
        for (std::size_t i = 0; i < d; ++i)
            s.post.lambdas[i] = d == 1 ? 2.0 : 2.0 - static_cast<double>(i) / (d - 1);
    } else {
        throw InvalidInput("scenario_library: unknown scenario '" + std::string(name) + "'");
    }
    s.validate();
    return s;
}

}  // namespace scusum
