#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "scusum/errors.hpp"
#include "scusum/linalg.hpp"
#include "scusum/mat.hpp"
#include "scusum/model.hpp"

namespace scusum {

// Result of running a detector over a stream. `trajectory[i]` is the i-th
// emitted statistic (the first one appears after `warmup_length` arrivals);
// `alarm_time` is the arrival index at which the statistic first reached the
// threshold, so warm-up samples are counted inside run lengths and delays.
struct AlarmReport {
    std::optional<std::uint64_t> alarm_time;
    std::vector<double> trajectory;
    std::size_t warmup_length = 0;
};

// Shared step-wise contract: step(x) consumes exactly one observation and
// returns the current decision statistic, or nothing while warming up. Once
// the statistic reaches the threshold the detector is stopped; further steps
// are a caller bug.
class Detector {
  public:
    explicit Detector(double threshold) : threshold_(threshold) {}
    virtual ~Detector() = default;

    std::optional<double> step(std::span<const double> x) {
        if (alarmed_) throw InvalidInput("Detector: step() after alarm");
        if (x.size() != dim()) throw InvalidInput("Detector: observation dimension mismatch");
        if (!all_finite(x)) throw InvalidInput("Detector: non-finite observation");
        ++time_;
        std::optional<double> stat = compute(x);
        if (stat && *stat >= threshold_) {
            alarmed_ = true;
            alarm_time_ = time_;
        }
        return stat;
    }

    virtual std::size_t dim() const = 0;
    virtual std::size_t warmup_length() const = 0;
    virtual std::string_view name() const = 0;

    void reset() {
        alarmed_ = false;
        time_ = 0;
        alarm_time_ = 0;
        do_reset();
    }

    double threshold() const { return threshold_; }
    void set_threshold(double b) { threshold_ = b; }
    bool alarmed() const { return alarmed_; }
    std::uint64_t alarm_time() const { return alarm_time_; }
    std::uint64_t time() const { return time_; }

  protected:
    virtual std::optional<double> compute(std::span<const double> x) = 0;
    virtual void do_reset() = 0;

  private:
    double threshold_;
    bool alarmed_ = false;
    std::uint64_t time_ = 0;
    std::uint64_t alarm_time_ = 0;
};

// ---------------------------------------------------------------------------
// Exact CUSUM (oracle): knows the true post-change spike.
//   S_t = max(S_{t-1}, 0) + sum_i [ rho_i/(1+rho_i) (u_i^T x)^2 - sigma2 log(1+rho_i) ]
// ---------------------------------------------------------------------------
struct ExactCusumConfig {
    double sigma2 = 1.0;
    Mat basis;  // k x d true post-change directions
    Vec rho;    // componentwise SNR, all positive
    double b = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(sigma2 > 0.0)) throw InvalidInput("ExactCusumConfig: sigma2 must be positive");
        if (basis.cols() != rho.size() || basis.rows() == 0)
            throw InvalidInput("ExactCusumConfig: basis/rho shape mismatch");
        for (double r : rho)
            if (!(r > 0.0)) throw InvalidInput("ExactCusumConfig: rho must be positive");
    }
};

class ExactCusum final : public Detector {
  public:
    explicit ExactCusum(ExactCusumConfig cfg) : Detector(cfg.b), cfg_(std::move(cfg)) {
        cfg_.validate();
        coef_.resize(cfg_.rho.size());
        offset_ = 0.0;
        for (std::size_t i = 0; i < cfg_.rho.size(); ++i) {
            coef_[i] = cfg_.rho[i] / (1.0 + cfg_.rho[i]);
            offset_ += cfg_.sigma2 * std::log1p(cfg_.rho[i]);
        }
    }

    std::size_t dim() const override { return cfg_.basis.rows(); }
    std::size_t warmup_length() const override { return 0; }
    std::string_view name() const override { return "exact-cusum"; }

    // per-sample log-likelihood-ratio increment (without the running max)
    double increment(std::span<const double> x) const {
        double inc = -offset_;
        for (std::size_t j = 0; j < coef_.size(); ++j) {
            double proj = 0.0;
            for (std::size_t i = 0; i < dim(); ++i) proj += cfg_.basis(i, j) * x[i];
            inc += coef_[j] * proj * proj;
        }
        return inc;
    }

  protected:
    std::optional<double> compute(std::span<const double> x) override {
        s_ = std::max(s_, 0.0) + increment(x);
        return s_;
    }
    void do_reset() override { s_ = 0.0; }

  private:
    ExactCusumConfig cfg_;
    Vec coef_;
    double offset_ = 0.0;
    double s_ = 0.0;
};

// ---------------------------------------------------------------------------
// Multi-rank Subspace-CUSUM. Upon arrival of sample s >= w+1 the window
// covariance over [s-w+1, s] is eigendecomposed and the sample x_{s-w} —
// strictly older than every window sample, hence independent of the estimate —
// is scored: Z = ||U_hat^T x||^2, S = max(S,0) + Z - Delta. The alarm is
// reported at the arrival index, so the w-sample estimation lag is part of
// every run length and delay.
// ---------------------------------------------------------------------------
struct SubspaceCusumConfig {
    std::size_t k = 0;
    std::size_t d = 0;
    std::size_t w = 0;
    double delta = 0.0;
    double b = std::numeric_limits<double>::infinity();

    void validate() const {
        if (k == 0 || d == 0 || d > k) throw InvalidInput("SubspaceCusumConfig: need 1 <= d <= k");
        if (w < std::max<std::size_t>(d, 2))
            throw InvalidInput("SubspaceCusumConfig: need w >= max(d, 2)");
        if (!(delta > 0.0)) throw InvalidInput("SubspaceCusumConfig: delta must be positive");
    }
};

class SubspaceCusum final : public Detector {
  public:
    explicit SubspaceCusum(SubspaceCusumConfig cfg) : Detector(cfg.b), cfg_(cfg) {
        cfg_.validate();
        buffer_ = Mat(cfg_.w + 1, cfg_.k);
        do_reset();
    }

    std::size_t dim() const override { return cfg_.k; }
    std::size_t warmup_length() const override { return cfg_.w; }
    std::string_view name() const override { return "subspace-cusum"; }
    const SubspaceCusumConfig& config() const { return cfg_; }

    // latest projection energy Z_t (valid after warm-up)
    double last_increment() const { return z_; }

  protected:
    std::optional<double> compute(std::span<const double> x) override {
        const std::size_t w = cfg_.w;
        const std::uint64_t n = time();
        if (n <= w) {
            write_slot((n - 1) % (w + 1), x);
            add_outer_scaled(x, 1.0 / w);
            return std::nullopt;
        }
        // slot holding x_{n-w-1} was scored on the previous arrival; reuse it
        const std::size_t scored_slot = (n - w - 1) % (w + 1);
        const std::size_t incoming_slot = (n - 1) % (w + 1);
        // window [n-w+1, n]: drop the sample about to be scored, add x_n
        add_outer_scaled(buffer_.row(scored_slot), -1.0 / w);
        write_slot(incoming_slot, x);
        add_outer_scaled(x, 1.0 / w);
        if (++steps_since_rebuild_ >= w) rebuild_window(n);

        SpectralDecomposition eig =
            cold_ ? eig_sym(cov_) : eig_sym_warm(cov_, warm_);
        cold_ = false;
        warm_ = eig.eigenvectors;

        const auto scored = buffer_.row(scored_slot);
        z_ = 0.0;
        for (std::size_t j = 0; j < cfg_.d; ++j) {
            double proj = 0.0;
            for (std::size_t i = 0; i < cfg_.k; ++i) proj += eig.eigenvectors(i, j) * scored[i];
            z_ += proj * proj;
        }
        s_ = std::max(s_, 0.0) + z_ - cfg_.delta;
        return s_;
    }

    void do_reset() override {
        buffer_.fill(0.0);
        cov_ = Mat(cfg_.k, cfg_.k);
        warm_ = Mat();
        cold_ = true;
        s_ = 0.0;
        z_ = 0.0;
        steps_since_rebuild_ = 0;
    }

  private:
    void write_slot(std::size_t slot, std::span<const double> x) {
        auto row = buffer_.row(slot);
        for (std::size_t i = 0; i < cfg_.k; ++i) row[i] = x[i];
    }

    void add_outer_scaled(std::span<const double> x, double alpha) {
        add_outer(cov_, x, alpha);
    }

    // recompute the window sum exactly to bound floating-point drift, and
    // restart the eigensolver cold rather than trusting the stale basis
    void rebuild_window(std::uint64_t n) {
        cov_.fill(0.0);
        for (std::uint64_t t = n - cfg_.w + 1; t <= n; ++t)
            add_outer(cov_, buffer_.row((t - 1) % (cfg_.w + 1)), 1.0 / cfg_.w);
        steps_since_rebuild_ = 0;
        cold_ = true;
    }

    SubspaceCusumConfig cfg_;
    Mat buffer_;  // ring of the last w+1 observations
    Mat cov_;     // (1/w) sum over the current window
    Mat warm_;
    bool cold_ = true;
    double s_ = 0.0;
    double z_ = 0.0;
    std::size_t steps_since_rebuild_ = 0;
};

// ---------------------------------------------------------------------------
// Eigenvalue Shewhart chart: largest eigenvalue of the sliding w-window
// sample covariance; one-shot rule, no memory between steps.
// ---------------------------------------------------------------------------
struct EigShewhartConfig {
    std::size_t k = 0;
    std::size_t w = 0;
    double b = std::numeric_limits<double>::infinity();

    void validate() const {
        if (k == 0) throw InvalidInput("EigShewhartConfig: k must be positive");
        if (w < 2) throw InvalidInput("EigShewhartConfig: need w >= 2");
    }
};

class EigShewhart final : public Detector {
  public:
    explicit EigShewhart(EigShewhartConfig cfg) : Detector(cfg.b), cfg_(cfg) {
        cfg_.validate();
        buffer_ = Mat(cfg_.w, cfg_.k);
        do_reset();
    }

    std::size_t dim() const override { return cfg_.k; }
    std::size_t warmup_length() const override { return cfg_.w - 1; }
    std::string_view name() const override { return "eig-shewhart"; }
    const EigShewhartConfig& config() const { return cfg_; }

  protected:
    std::optional<double> compute(std::span<const double> x) override {
        const std::size_t w = cfg_.w;
        const std::uint64_t n = time();
        const std::size_t slot = (n - 1) % w;
        if (n > w) add_outer(cov_, buffer_.row(slot), -1.0 / w);
        auto row = buffer_.row(slot);
        for (std::size_t i = 0; i < cfg_.k; ++i) row[i] = x[i];
        add_outer(cov_, x, 1.0 / w);
        if (n < w) return std::nullopt;
        if (++steps_since_rebuild_ >= w) rebuild();

        SpectralDecomposition eig = cold_ ? eig_sym(cov_) : eig_sym_warm(cov_, warm_);
        cold_ = false;
        warm_ = eig.eigenvectors;
        return eig.eigenvalues[0];
    }

    void do_reset() override {
        buffer_.fill(0.0);
        cov_ = Mat(cfg_.k, cfg_.k);
        warm_ = Mat();
        cold_ = true;
        steps_since_rebuild_ = 0;
    }

  private:
    void rebuild() {
        cov_.fill(0.0);
        for (std::size_t r = 0; r < cfg_.w; ++r) add_outer(cov_, buffer_.row(r), 1.0 / cfg_.w);
        steps_since_rebuild_ = 0;
        cold_ = true;
    }

    EigShewhartConfig cfg_;
    Mat buffer_;
    Mat cov_;
    Mat warm_;
    bool cold_ = true;
    std::size_t steps_since_rebuild_ = 0;
};

// ---------------------------------------------------------------------------
// Hotelling T^2 chart with known pre-change covariance sigma2 * I, so the
// statistic reduces to ||x||^2 / sigma2. One-shot rule.
// ---------------------------------------------------------------------------
struct HotellingConfig {
    std::size_t k = 0;
    double sigma2 = 1.0;
    double b = std::numeric_limits<double>::infinity();

    void validate() const {
        if (k == 0) throw InvalidInput("HotellingConfig: k must be positive");
        if (!(sigma2 > 0.0)) throw InvalidInput("HotellingConfig: sigma2 must be positive");
    }
};

class HotellingT2 final : public Detector {
  public:
    explicit HotellingT2(HotellingConfig cfg) : Detector(cfg.b), cfg_(cfg) { cfg_.validate(); }

    std::size_t dim() const override { return cfg_.k; }
    std::size_t warmup_length() const override { return 0; }
    std::string_view name() const override { return "hotelling-t2"; }

  protected:
    std::optional<double> compute(std::span<const double> x) override {
        return dot(x, x) / cfg_.sigma2;
    }
    void do_reset() override {}

  private:
    HotellingConfig cfg_;
};

// ---------------------------------------------------------------------------
// Window-limited GLR: over candidate change points j on a strided grid within
// the retained window, the generalized log-likelihood ratio of "sigma2 I
// before j, spiked with rank <= d (eigenvalue MLE plug-in) after j" evaluated
// from the segment covariance of [j+1, current]. Segments shorter than d+1
// samples are skipped; the statistic is clamped at zero.
// ---------------------------------------------------------------------------
struct GlrConfig {
    std::size_t k = 0;
    std::size_t d = 1;
    double sigma2 = 1.0;
    std::size_t w_max = 200;
    std::size_t stride = 5;
    double b = std::numeric_limits<double>::infinity();

    void validate() const {
        if (k == 0 || d == 0 || d > k) throw InvalidInput("GlrConfig: need 1 <= d <= k");
        if (!(sigma2 > 0.0)) throw InvalidInput("GlrConfig: sigma2 must be positive");
        if (w_max < d + 2 || stride == 0) throw InvalidInput("GlrConfig: bad window/stride");
    }
};

class WindowGlr final : public Detector {
  public:
    explicit WindowGlr(GlrConfig cfg) : Detector(cfg.b), cfg_(cfg) { cfg_.validate(); }

    std::size_t dim() const override { return cfg_.k; }
    std::size_t warmup_length() const override { return 0; }
    std::string_view name() const override { return "glr"; }

  protected:
    std::optional<double> compute(std::span<const double> x) override {
        samples_.emplace_back(x.begin(), x.end());
        if (samples_.size() > cfg_.w_max) samples_.pop_front();
        ++n_;

        // suffix outer-product sums on the candidate grid, oldest first
        double best = 0.0;
        const std::size_t retained = samples_.size();
        Mat sum(cfg_.k, cfg_.k);
        std::size_t in_sum = 0;  // number of newest samples accumulated
        // walk candidates from the newest (shortest segment) to the oldest,
        // growing the suffix sum incrementally
        for (std::size_t m = cfg_.d + 1; m <= retained; ++m) {
            while (in_sum < m) {
                ++in_sum;
                add_outer(sum, std::span<const double>(samples_[retained - in_sum]));
            }
            const bool on_grid = (m - (cfg_.d + 1)) % cfg_.stride == 0 || m == retained;
            if (!on_grid) continue;
            best = std::max(best, segment_glr(sum, m));
        }
        return best;
    }

    void do_reset() override {
        samples_.clear();
        n_ = 0;
    }

  private:
    double segment_glr(const Mat& sum, std::size_t m) const {
        Mat cov(cfg_.k, cfg_.k);
        for (std::size_t i = 0; i < cfg_.k; ++i)
            for (std::size_t j = 0; j < cfg_.k; ++j) cov(i, j) = sum(i, j) / m;
        SpectralDecomposition eig = eig_sym(cov);
        double llr = 0.0;
        for (std::size_t i = 0; i < cfg_.d; ++i) {
            const double ratio = eig.eigenvalues[i] / cfg_.sigma2;
            if (ratio > 1.0) llr += 0.5 * m * (ratio - 1.0 - std::log(ratio));
        }
        return llr;
    }

    GlrConfig cfg_;
    std::deque<Vec> samples_;
    std::uint64_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Config variant, factory, and the run loop.
// ---------------------------------------------------------------------------
using DetectorConfig = std::variant<ExactCusumConfig, SubspaceCusumConfig, EigShewhartConfig,
                                    HotellingConfig, GlrConfig>;

inline std::unique_ptr<Detector> make_detector(const DetectorConfig& cfg) {
    return std::visit(
        [](const auto& c) -> std::unique_ptr<Detector> {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ExactCusumConfig>)
                return std::make_unique<ExactCusum>(c);
            else if constexpr (std::is_same_v<T, SubspaceCusumConfig>)
                return std::make_unique<SubspaceCusum>(c);
            else if constexpr (std::is_same_v<T, EigShewhartConfig>)
                return std::make_unique<EigShewhart>(c);
            else if constexpr (std::is_same_v<T, HotellingConfig>)
                return std::make_unique<HotellingT2>(c);
            else
                return std::make_unique<WindowGlr>(c);
        },
        cfg);
}

inline DetectorConfig with_threshold(DetectorConfig cfg, double b) {
    std::visit([b](auto& c) { c.b = b; }, cfg);
    return cfg;
}

inline double threshold_of(const DetectorConfig& cfg) {
    return std::visit([](const auto& c) { return c.b; }, cfg);
}

// Feeds the stream until the detector alarms or `max_steps` arrivals pass.
template <typename Stream>
AlarmReport run_detector(Detector& det, Stream& src, std::uint64_t max_steps,
                         bool record_trajectory = true) {
    AlarmReport report;
    report.warmup_length = det.warmup_length();
    for (std::uint64_t s = 0; s < max_steps && !det.alarmed(); ++s) {
        const std::optional<double> stat = det.step(src.next());
        if (record_trajectory && stat) report.trajectory.push_back(*stat);
    }
    if (det.alarmed()) report.alarm_time = det.alarm_time();
    return report;
}

}  // namespace scusum
