#include "multipass/kernel.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <tuple>

namespace multipass {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kTwoPi = 2.0 * kPi;

double pow_int_neg(double k, double q) { return std::pow(k, -q); }

// Euler-Maclaurin correction coefficients B_{2j}/(2j)! up to j=4
constexpr double kBernFact[4] = {
    1.0 / 12.0,        // B_2/2!
    -1.0 / 720.0,      // B_4/4!
    1.0 / 30240.0,     // B_6/6!
    -1.0 / 1209600.0,  // B_8/8!
};

double bernoulli_poly(int order, double u) {
  const double u2 = u * u;
  switch (order) {
    case 2:
      return u2 - u + 1.0 / 6.0;
    case 4:
      return u2 * u2 - 2.0 * u * u2 + u2 - 1.0 / 30.0;
    case 6:
      return ((((u - 3.0) * u + 2.5) * u2 - 0.5) * u2) + 1.0 / 42.0;
    case 8:
      return (((((u - 4.0) * u + 14.0 / 3.0) * u2 - 7.0 / 3.0) * u2 +
               2.0 / 3.0) *
              u2) -
             1.0 / 30.0;
    default:
      throw invalid_order_error("closed form only for even order <= 8");
  }
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double fold_fraction(double u) {
  double frac = u - std::floor(u);
  if (frac >= 1.0) frac = 0.0;  // u just below an integer rounds up
  return frac;
}

bool is_closed_form_order(double q) {
  if (q == 1.0) return true;
  if (q == 2.0 || q == 4.0 || q == 6.0 || q == 8.0) return true;
  return false;
}

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Analytic continuation of zeta to s != 1: Euler-Maclaurin for s >= 0,
// the functional equation for s < 0.
double zeta_continued(double s) {
  if (s < 0.0)
    return std::pow(2.0, s) * std::pow(kPi, s - 1.0) *
           std::sin(kPi * s / 2.0) * std::tgamma(1.0 - s) *
           zeta_continued(1.0 - s);
  const int n = 256;
  double sum = 0.0;
  for (int k = n; k >= 1; --k) sum += pow_int_neg(k, s);
  const double nd = n;
  double tail = std::pow(nd, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(nd, -s);
  double factor = s;
  double npow = std::pow(nd, -s - 1.0);
  for (int j = 0; j < 4; ++j) {
    tail += kBernFact[j] * factor * npow;
    factor *= (s + 2 * j + 1) * (s + 2 * j + 2);
    npow /= nd * nd;
  }
  return sum + tail;
}

}  // namespace

double zeta(double q) {
  if (q <= 1.0) {
    std::ostringstream msg;
    msg << "zeta: order must exceed 1, got " << q;
    throw invalid_order_error(msg.str());
  }
  return zeta_continued(q);
}

struct KernelEvaluator::Impl {
  // Tabulated: half-table on u = j/G, j = 0..G/2 (symmetric about 1/2)
  std::vector<double> table;
  std::size_t fallback_cells = 0;
  double value_at_zero = 0.0;  // 2 zeta(q) when q > 1

  // Small-w expansion used inside the singular zone for q < 3:
  //   Lambda_q(w) = sing_coef (2 pi w)^{q-1}
  //              + 2 sum_l (-1)^l zeta(q - 2l) (2 pi w)^{2l} / (2l)!
  // with sing_coef = pi / (cos(pi q / 2) Gamma(q)).
  bool has_expansion = false;
  double sing_coef = 0.0;
  double series_coef[4] = {0.0, 0.0, 0.0, 0.0};

  // Direct: coefficient cache k^{-q}, built lazily on first use
  mutable std::vector<double> coeffs;
  mutable std::once_flag coeffs_once;

  double q = 0.0;
  std::size_t truncation = 0;

  double expansion_eval(double w) const {
    const double x = kTwoPi * w;
    double acc = sing_coef * std::pow(x, q - 1.0);
    const double x2 = x * x;
    double p = 1.0;
    for (double c : series_coef) {
      acc += c * p;
      p *= x2;
    }
    return acc;
  }

  const std::vector<double>& direct_coeffs() const {
    std::call_once(coeffs_once, [this] {
      coeffs.resize(truncation);
      for (std::size_t k = 0; k < truncation; ++k)
        coeffs[k] = pow_int_neg(static_cast<double>(k + 1), q);
    });
    return coeffs;
  }

  // 2 sum_{k=1}^{K} cos(2 pi k w) / k^q via a rotation recurrence
  double direct_eval(double w) const {
    const auto& c = direct_coeffs();
    const double step_c = std::cos(kTwoPi * w);
    const double step_s = std::sin(kTwoPi * w);
    double ck = step_c;
    double sk = step_s;
    double acc = 0.0;
    for (double coef : c) {
      acc += coef * ck;
      const double cn = ck * step_c - sk * step_s;
      sk = sk * step_c + ck * step_s;
      ck = cn;
    }
    return 2.0 * acc;
  }
};

KernelEvaluator::KernelEvaluator(double q, KernelStrategy strategy,
                                 TabulationParams params)
    : q_(q), strategy_(strategy), params_(params), impl_(new Impl) {
  if (q <= 0.0) {
    std::ostringstream msg;
    msg << "kernel order must be positive, got " << q;
    throw invalid_order_error(msg.str());
  }
  if (strategy_ == KernelStrategy::Auto)
    strategy_ =
        is_closed_form_order(q) ? KernelStrategy::ClosedForm : KernelStrategy::Tabulated;
  if (strategy_ == KernelStrategy::ClosedForm && !is_closed_form_order(q))
    throw invalid_order_error(
        "closed form requires q = 1 or an even integer <= 8");

  impl_->q = q;
  impl_->truncation = params_.truncation;
  if (q > 1.0) impl_->value_at_zero = 2.0 * zeta(q);

  if (strategy_ == KernelStrategy::Tabulated) {
    const std::size_t g = params_.grid_size;
    if (g < 8 || (g & (g - 1)) != 0)
      throw std::invalid_argument("grid_size must be a power of two >= 8");
    if (params_.truncation < g)
      throw std::invalid_argument("truncation must be at least grid_size");

    // fold coefficients k^{-q} into grid bins modulo G
    std::vector<double> bins(g, 0.0);
    for (std::size_t k = 1; k <= params_.truncation; ++k)
      bins[k & (g - 1)] += pow_int_neg(static_cast<double>(k), q);

    // half-spectrum input for a DCT-I: the cosine sum at j/G for j = 0..G/2
    const std::size_t half = g / 2;
    std::vector<double> in(half + 1), out(half + 1);
    in[0] = bins[0];
    in[half] = bins[half];
    for (std::size_t m = 1; m < half; ++m)
      in[m] = 0.5 * (bins[m] + bins[g - m]);
    {
      std::lock_guard<std::mutex> lock(fftw_mutex());
      fftw_plan plan =
          fftw_plan_r2r_1d(static_cast<int>(half + 1), in.data(), out.data(),
                           FFTW_REDFT00, FFTW_ESTIMATE);
      fftw_execute(plan);
      fftw_destroy_plan(plan);
    }
    impl_->table.resize(half + 1);
    for (std::size_t j = 0; j <= half; ++j) impl_->table[j] = 2.0 * out[j];

    // For q >= 3 the curvature at the origin is mild enough that linear
    // interpolation stays accurate even in the first grid cell.  Below
    // that, interpolation degrades near the singularity, so a 64-cell
    // zone around u = 0 switches to the small-w expansion instead.
    if (q < 3.0) {
      impl_->fallback_cells = 64;
      if (q != 1.0) {
        impl_->has_expansion = true;
        impl_->sing_coef =
            kPi / (std::cos(kPi * q / 2.0) * std::tgamma(q));
        double fact2l = 1.0;
        for (int l = 0; l < 4; ++l) {
          if (l > 0) fact2l *= (2 * l - 1) * (2 * l);
          const double sign = (l % 2 == 0) ? 1.0 : -1.0;
          impl_->series_coef[l] =
              2.0 * sign * zeta_continued(q - 2.0 * l) / fact2l;
        }
      }
    }
  }
}

KernelEvaluator::~KernelEvaluator() = default;
KernelEvaluator::KernelEvaluator(KernelEvaluator&&) noexcept = default;
KernelEvaluator& KernelEvaluator::operator=(KernelEvaluator&&) noexcept =
    default;

double KernelEvaluator::operator()(double u) const {
  if (!std::isfinite(u)) throw std::invalid_argument("kernel input not finite");
  const double frac = fold_fraction(u);
  const double w = std::min(frac, 1.0 - frac);

  if (w <= std::numeric_limits<double>::epsilon()) {
    if (q_ <= 1.0)
      throw divergent_point_error("series diverges at u = 0 for q <= 1");
    return impl_->value_at_zero;
  }

  switch (strategy_) {
    case KernelStrategy::ClosedForm: {
      if (q_ == 1.0) return -2.0 * std::log(2.0 * std::sin(kPi * w));
      const int m = static_cast<int>(q_) / 2;
      const double sign = (m % 2 == 0) ? -1.0 : 1.0;
      return sign * std::pow(kTwoPi, q_) / factorial(static_cast<int>(q_)) *
             bernoulli_poly(static_cast<int>(q_), w);
    }
    case KernelStrategy::Tabulated: {
      const std::size_t g = params_.grid_size;
      const double cell = w * static_cast<double>(g);
      if (cell < static_cast<double>(impl_->fallback_cells)) {
        if (impl_->has_expansion) return impl_->expansion_eval(w);
        return -2.0 * std::log(2.0 * std::sin(kPi * w));  // q = 1 only
      }
      const std::size_t half = g / 2;
      std::size_t i = static_cast<std::size_t>(cell);
      if (i >= half) i = half - 1;
      const double t = cell - static_cast<double>(i);
      return impl_->table[i] * (1.0 - t) + impl_->table[i + 1] * t;
    }
    case KernelStrategy::Direct:
      return impl_->direct_eval(w);
    default:
      throw std::logic_error("unresolved kernel strategy");
  }
}

double KernelEvaluator::worst_case_bound(double u) const {
  const double frac = fold_fraction(u);
  const double w = std::min(frac, 1.0 - frac);
  if (w <= std::numeric_limits<double>::epsilon())
    return (q_ > 1.0) ? 2e-10 : std::numeric_limits<double>::infinity();

  const double kd = static_cast<double>(params_.truncation);
  const double tail = 2.0 * std::pow(kd, -q_) / std::sin(kPi * w);
  switch (strategy_) {
    case KernelStrategy::ClosedForm:
      return 1e-12;
    case KernelStrategy::Direct:
      return tail;
    case KernelStrategy::Tabulated: {
      const double g = static_cast<double>(params_.grid_size);
      if (w * g < static_cast<double>(impl_->fallback_cells)) {
        if (impl_->has_expansion)
          return 1e-11 * (1.0 + std::abs(impl_->expansion_eval(w)));
        return 1e-12;  // q = 1 closed form in the zone
      }
      // linear interpolation error estimated from the local second difference
      std::size_t i = static_cast<std::size_t>(w * g);
      if (i < 1) i = 1;
      double curv = 0.0;
      if (i + 1 < impl_->table.size())
        curv = std::abs(impl_->table[i + 1] - 2.0 * impl_->table[i] +
                        impl_->table[i - 1]);
      return tail + 0.25 * curv;
    }
    default:
      return std::numeric_limits<double>::infinity();
  }
}

std::shared_ptr<const KernelEvaluator> shared_evaluator(
    double q, KernelStrategy strategy, TabulationParams params) {
  using Key = std::tuple<double, int, std::size_t, std::size_t>;
  static std::map<Key, std::shared_ptr<const KernelEvaluator>> cache;
  static std::mutex mutex;
  const Key key{q, static_cast<int>(strategy), params.grid_size,
                params.truncation};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto ev = std::make_shared<const KernelEvaluator>(q, strategy, params);
  cache.emplace(key, ev);
  return ev;
}

Eigen::MatrixXd gram_matrix(const KernelEvaluator& evaluator,
                            const std::vector<double>& xs) {
  if (evaluator.order() <= 1.0)
    throw invalid_order_error("gram matrix requires order q > 1");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd k(n, n);
  const double diag = evaluator(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = diag;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = evaluator(xs[static_cast<std::size_t>(i)] -
                                 xs[static_cast<std::size_t>(j)]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double l2_inner(double q, double q_prime, double x, double z) {
  const double sum = q + q_prime;
  if (sum <= 1.0) {
    std::ostringstream msg;
    msg << "l2_inner requires q + q' > 1, got " << sum;
    throw invalid_order_error(msg.str());
  }
  auto ev = shared_evaluator(sum);
  return (*ev)(x - z);
}

}  // namespace multipass
