#include "akstab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <tuple>

namespace akstab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-thread FFTW machinery for one grid size: a complex scratch buffer and
// in-place c2c plans along each axis (guru interface, 1 transform dim + 3
// loop dims). Plans are bound to the scratch buffer, so everything stays
// thread-confined; FFTW plan creation is not thread-safe across threads
// otherwise.
class AxisFft {
 public:
  explicit AxisFft(int n) : n_(n) {
    std::size_t total = GridSpec{n}.total();
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    if (!buf_) throw Error("fftw_malloc failed");
    int strides[4];
    strides[3] = 1;
    for (int d = 2; d >= 0; --d) strides[d] = strides[d + 1] * n;
    for (int axis = 0; axis < 4; ++axis) {
      fftw_iodim dim{n, strides[axis], strides[axis]};
      fftw_iodim loops[3];
      int li = 0;
      for (int d = 0; d < 4; ++d) {
        if (d == axis) continue;
        loops[li++] = fftw_iodim{n, strides[d], strides[d]};
      }
      fwd_[axis] = fftw_plan_guru_dft(1, &dim, 3, loops, buf_, buf_, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
      bwd_[axis] = fftw_plan_guru_dft(1, &dim, 3, loops, buf_, buf_, FFTW_BACKWARD,
                                      FFTW_ESTIMATE);
      if (!fwd_[axis] || !bwd_[axis]) throw Error("fftw plan creation failed");
    }
  }
  ~AxisFft() {
    for (int a = 0; a < 4; ++a) {
      fftw_destroy_plan(fwd_[a]);
      fftw_destroy_plan(bwd_[a]);
    }
    fftw_free(buf_);
  }
  AxisFft(const AxisFft&) = delete;
  AxisFft& operator=(const AxisFft&) = delete;

  std::complex<double>* buffer() { return reinterpret_cast<std::complex<double>*>(buf_); }
  void forward(int axis) { fftw_execute(fwd_[axis]); }
  void backward(int axis) { fftw_execute(bwd_[axis]); }
  int n() const { return n_; }

 private:
  int n_;
  fftw_complex* buf_;
  fftw_plan fwd_[4], bwd_[4];
};

AxisFft& axis_fft_for(int n) {
  thread_local std::map<int, std::unique_ptr<AxisFft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<AxisFft>(n)).first;
  return *it->second;
}

// Integer frequency of index i on an n-point axis, in [-n/2, n/2).
inline int freq_of(int i, int n) { return (i <= n / 2 - 1) ? i : i - n; }

void check_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw InvalidField("grid mismatch");
}

}  // namespace

GridSpec GridSpec::checked(int n) {
  if (n < 8 || n % 2 != 0) throw InvalidField("grid size must be even and >= 8");
  return GridSpec{n};
}

double GridSpec::spacing() const { return kTwoPi / n; }
double GridSpec::coord(int i) const { return kTwoPi * i / n; }
double GridSpec::cell_volume() const {
  double h = spacing();
  return h * h * h * h;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}
ScalarField& ScalarField::operator-=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(const ScalarField& o) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] *= o.values_[i];
  return *this;
}
ScalarField& ScalarField::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}
ScalarField& ScalarField::add_scaled(const ScalarField& o, double c) {
  check_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += c * o.values_[i];
  return *this;
}

bool ScalarField::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
ScalarField operator*(double c, ScalarField a) { return a *= c; }

ScalarField sample(GridSpec grid,
                   const std::function<double(double, double, double, double)>& f) {
  ScalarField out(grid);
  const int n = grid.n;
  std::size_t idx = 0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i3 = 0; i3 < n; ++i3)
        for (int i4 = 0; i4 < n; ++i4)
          out[idx++] = f(grid.coord(i1), grid.coord(i2), grid.coord(i3), grid.coord(i4));
  return out;
}

ScalarField pointwise(const ScalarField& a, const std::function<double(double)>& f) {
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

ScalarField spectral_derivative(const ScalarField& field, int axis) {
  if (axis < 1 || axis > 4) throw InvalidField("axis out of range");
  if (!field.all_finite()) throw InvalidField("non-finite input field");
  const int n = field.grid().n;
  const int a = axis - 1;
  AxisFft& fft = axis_fft_for(n);
  std::complex<double>* buf = fft.buffer();
  const std::size_t total = field.size();
  for (std::size_t i = 0; i < total; ++i) buf[i] = field[i];
  fft.forward(a);

  // Multiply by i*k along the axis; zero the Nyquist mode; normalize.
  std::size_t stride = 1;
  for (int d = a + 1; d < 4; ++d) stride *= static_cast<std::size_t>(n);
  const double scale = 1.0 / n;
  for (std::size_t i = 0; i < total; ++i) {
    int ia = static_cast<int>((i / stride) % static_cast<std::size_t>(n));
    int k = freq_of(ia, n);
    if (std::abs(k) == n / 2) k = 0;
    buf[i] *= std::complex<double>(0.0, k * scale);
  }
  fft.backward(a);

  ScalarField out(field.grid());
  for (std::size_t i = 0; i < total; ++i) out[i] = buf[i].real();
  return out;
}

std::array<ScalarField, 4> gradient(const ScalarField& field) {
  return {spectral_derivative(field, 1), spectral_derivative(field, 2),
          spectral_derivative(field, 3), spectral_derivative(field, 4)};
}

double integrate(const ScalarField& field, const ScalarField& density) {
  check_same_grid(field, density);
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (density[i] <= 0.0) throw InvalidDensity("density must be positive pointwise");
    s += field[i] * density[i];
  }
  return s * field.grid().cell_volume();
}

double integrate(const ScalarField& field) {
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += field[i];
  return s * field.grid().cell_volume();
}

double l2_inner(const ScalarField& a, const ScalarField& b) {
  check_same_grid(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

double l2_norm(const ScalarField& a) { return std::sqrt(std::max(0.0, l2_inner(a, a))); }

ScalarField zero_mean_project(const ScalarField& field, const ScalarField& density) {
  double mass = integrate(density);
  double mean = integrate(field, density) / mass;
  ScalarField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= mean;
  return out;
}

ScalarField zero_mean_project(const ScalarField& field) {
  double vol = kTwoPi * kTwoPi * kTwoPi * kTwoPi;
  double mean = integrate(field) / vol;
  ScalarField out = field;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= mean;
  return out;
}

double parseval_sum(const ScalarField& field) {
  const int n = field.grid().n;
  AxisFft& fft = axis_fft_for(n);
  std::complex<double>* buf = fft.buffer();
  for (std::size_t i = 0; i < field.size(); ++i) buf[i] = field[i];
  for (int a = 0; a < 4; ++a) fft.forward(a);
  const double norm = 1.0 / static_cast<double>(field.size());
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += std::norm(buf[i] * norm);
  double vol = kTwoPi * kTwoPi * kTwoPi * kTwoPi;
  return s * vol;
}

std::vector<double> fourier_k2_table(GridSpec grid) {
  const int n = grid.n;
  std::vector<double> out(grid.total());
  std::size_t idx = 0;
  for (int i1 = 0; i1 < n; ++i1)
    for (int i2 = 0; i2 < n; ++i2)
      for (int i3 = 0; i3 < n; ++i3)
        for (int i4 = 0; i4 < n; ++i4) {
          double k1 = freq_of(i1, n), k2 = freq_of(i2, n), k3 = freq_of(i3, n),
                 k4 = freq_of(i4, n);
          out[idx++] = k1 * k1 + k2 * k2 + k3 * k3 + k4 * k4;
        }
  return out;
}

ScalarField apply_fourier_multiplier(const ScalarField& field,
                                     const std::vector<double>& mult) {
  if (mult.size() != field.size()) throw InvalidField("multiplier table size mismatch");
  const int n = field.grid().n;
  AxisFft& fft = axis_fft_for(n);
  std::complex<double>* buf = fft.buffer();
  for (std::size_t i = 0; i < field.size(); ++i) buf[i] = field[i];
  for (int a = 0; a < 4; ++a) fft.forward(a);
  const double norm = 1.0 / static_cast<double>(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) buf[i] *= mult[i] * norm;
  for (int a = 0; a < 4; ++a) fft.backward(a);
  ScalarField out(field.grid());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = buf[i].real();
  return out;
}

std::vector<double> fourier_coefficients_real(const ScalarField& field) {
  const int n = field.grid().n;
  AxisFft& fft = axis_fft_for(n);
  std::complex<double>* buf = fft.buffer();
  for (std::size_t i = 0; i < field.size(); ++i) buf[i] = field[i];
  for (int a = 0; a < 4; ++a) fft.forward(a);
  const double norm = 1.0 / static_cast<double>(field.size());
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = buf[i].real() * norm;
  return out;
}

ScalarField random_band_limited(GridSpec grid, int max_freq, std::uint64_t seed,
                                double amplitude) {
  const int n = grid.n;
  if (2 * max_freq >= n) throw InvalidField("max_freq not representable on grid");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  AxisFft& fft = axis_fft_for(n);
  std::complex<double>* buf = fft.buffer();
  std::fill(buf, buf + grid.total(), std::complex<double>(0.0, 0.0));
  const std::size_t sn = static_cast<std::size_t>(n);
  auto mode_index = [&](int k1, int k2, int k3, int k4) {
    auto wrap = [&](int k) { return static_cast<std::size_t>(k >= 0 ? k : n + k); };
    return ((wrap(k1) * sn + wrap(k2)) * sn + wrap(k3)) * sn + wrap(k4);
  };
  // Fill coefficients with Hermitian symmetry c(-k) = conj(c(k)); the mode
  // draw order is grid-independent, so the same seed gives the same function
  // on every resolution (used by the refinement-stability tests).
  for (int k1 = -max_freq; k1 <= max_freq; ++k1)
    for (int k2 = -max_freq; k2 <= max_freq; ++k2)
      for (int k3 = -max_freq; k3 <= max_freq; ++k3)
        for (int k4 = -max_freq; k4 <= max_freq; ++k4) {
          if (k1 == 0 && k2 == 0 && k3 == 0 && k4 == 0) continue;
          if (std::make_tuple(k1, k2, k3, k4) < std::make_tuple(-k1, -k2, -k3, -k4))
            continue;
          std::complex<double> c(unif(rng), unif(rng));
          buf[mode_index(k1, k2, k3, k4)] = c;
          buf[mode_index(-k1, -k2, -k3, -k4)] = std::conj(c);
        }
  for (int a = 0; a < 4; ++a) fft.backward(a);
  ScalarField out(grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = buf[i].real();
  double m = out.max_abs();
  if (m > 0) out *= amplitude / m;
  return out;
}

}  // namespace akstab
