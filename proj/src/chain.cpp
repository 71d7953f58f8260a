#include "betasplit/chain.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>

#include "betasplit/constants.hpp"
#include "betasplit/splitlaw.hpp"

namespace betasplit {

namespace {

// Neumaier-compensated accumulator: the running compensation also captures
// the case where the incoming term dominates the partial sum.
struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double next = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - next) + x;
    } else {
      comp += (x - next) + sum;
    }
    sum = next;
  }
  double value() const { return sum + comp; }
};

struct NeumaierLong {
  long double sum = 0.0L;
  long double comp = 0.0L;

  void add(long double x) {
    const long double next = sum + x;
    if (std::abs((double)sum) >= std::abs((double)x)) {
      comp += (sum - next) + x;
    } else {
      comp += (x - next) + sum;
    }
    sum = next;
  }
  long double value() const { return sum + comp; }
};

std::vector<double> reciprocal_table(int n) {
  std::vector<double> inv(static_cast<std::size_t>(n) + 1, 0.0);
  for (int d = 1; d <= n; ++d) inv[d] = 1.0 / d;
  return inv;
}

void check_range(int n, const HarmonicTable& ht, const char* who) {
  if (n < 1) throw std::domain_error(std::string(who) + ": need n >= 1");
  if (n > ht.n_max()) throw std::domain_error(std::string(who) + ": n exceeds the harmonic table");
}

}  // namespace

ChainPath simulate_chain(int n, const HarmonicTable& ht, Rng& rng, ChainMode mode) {
  check_range(n, ht, "simulate_chain");
  ChainPath path;
  path.states.push_back(n);
  int m = n;
  while (m > 1) {
    if (mode == ChainMode::continuous) path.holds.push_back(rng.exponential(ht.h(m - 1)));
    m = sample_sizebias(m, ht, rng);
    path.states.push_back(m);
  }
  return path;
}

double chain_absorption_time(int m, const HarmonicTable& ht, Rng& rng) {
  check_range(m, ht, "chain_absorption_time");
  double total = 0.0;
  while (m > 1) {
    total += rng.exponential(ht.h(m - 1));
    m = sample_sizebias(m, ht, rng);
  }
  return total;
}

void extend_depth_tables(NumericTable& tab, int N, const HarmonicTable& ht) {
  check_range(N, ht, "depth_tables");
  if (tab.t.empty()) {
    tab.t.assign(2, 0.0);
    tab.m2.assign(2, 0.0);
    tab.var.assign(2, 0.0);
    tab.thop.assign(2, 0.0);
  }
  if (N < tab.n_max()) return;
  const std::vector<double> inv = reciprocal_table(N);
  tab.t.reserve(static_cast<std::size_t>(N) + 1);
  tab.m2.reserve(static_cast<std::size_t>(N) + 1);
  tab.var.reserve(static_cast<std::size_t>(N) + 1);
  tab.thop.reserve(static_cast<std::size_t>(N) + 1);
  for (int n = static_cast<int>(tab.t.size()); n <= N; ++n) {
    const double* tp = tab.t.data();
    const double* mp = tab.m2.data();
    const double* hp = tab.thop.data();
    Neumaier st, sm, sh;
    for (int i = 2; i < n; ++i) {
      const double w = inv[n - i];
      st.add(tp[i] * w);
      sm.add(mp[i] * w);
      sh.add(hp[i] * w);
    }
    const double hn = ht.h(n - 1);
    const double tn = (1.0 + st.value()) / hn;
    const double m2n = (2.0 * tn + sm.value()) / hn;
    const double thn = 1.0 + sh.value() / hn;
    tab.t.push_back(tn);
    tab.m2.push_back(m2n);
    tab.var.push_back(m2n - tn * tn);
    tab.thop.push_back(thn);
  }
}

NumericTable depth_tables(int N, const HarmonicTable& ht) {
  NumericTable tab;
  extend_depth_tables(tab, N, ht);
  return tab;
}

std::vector<double> depth_mean_recurrence(int N, const HarmonicTable& ht) {
  return depth_tables(N, ht).t;
}

std::vector<double> hop_mean_recurrence(int N, const HarmonicTable& ht) {
  return depth_tables(N, ht).thop;
}

NumericTable depth_tables_extended_precision(int N, const HarmonicTable& ht) {
  check_range(N, ht, "depth_tables_extended_precision");
  std::vector<long double> t(static_cast<std::size_t>(N) + 1, 0.0L);
  std::vector<long double> m2(static_cast<std::size_t>(N) + 1, 0.0L);
  std::vector<long double> thop(static_cast<std::size_t>(N) + 1, 0.0L);
  std::vector<long double> inv(static_cast<std::size_t>(N) + 1, 0.0L);
  for (int d = 1; d <= N; ++d) inv[d] = 1.0L / d;
  for (int n = 2; n <= N; ++n) {
    NeumaierLong st, sm, sh;
    for (int i = 2; i < n; ++i) {
      const long double w = inv[n - i];
      st.add(t[i] * w);
      sm.add(m2[i] * w);
      sh.add(thop[i] * w);
    }
    const long double hn = ht.h(n - 1);
    t[n] = (1.0L + st.value()) / hn;
    m2[n] = (2.0L * t[n] + sm.value()) / hn;
    thop[n] = 1.0L + sh.value() / hn;
  }
  NumericTable tab;
  tab.t.resize(t.size());
  tab.m2.resize(t.size());
  tab.var.resize(t.size());
  tab.thop.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    tab.t[i] = static_cast<double>(t[i]);
    tab.m2[i] = static_cast<double>(m2[i]);
    tab.var[i] = static_cast<double>(m2[i] - t[i] * t[i]);
    tab.thop[i] = static_cast<double>(thop[i]);
  }
  return tab;
}

std::vector<double> occupancy(int n, const HarmonicTable& ht) {
  check_range(n, ht, "occupancy");
  std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
  a[n] = 1.0;
  if (n == 1) return a;
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);  // w[j] = a[j]/h[j-1]
  w[n] = 1.0 / ht.h(n - 1);
  const std::vector<double> inv = reciprocal_table(n);
  for (int m = n - 1; m >= 1; --m) {
    Neumaier acc;
    const double* wp = w.data();
    const double* ip = inv.data();
    for (int j = m + 1; j <= n; ++j) acc.add(wp[j] * ip[j - m]);
    a[m] = acc.value();
    if (m >= 2) w[m] = a[m] / ht.h(m - 1);
  }
  return a;
}

namespace {

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const ReferenceConstants kc;
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? -2.0 : 2.0) * kc.pi / len;
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (int base = 0; base < n; base += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        if ((j & 15) == 0) w = std::polar(1.0, ang * j);  // resync the twiddle drift
        const std::complex<double> u = a[base + j];
        const std::complex<double> v = a[base + j + len / 2] * w;
        a[base + j] = u + v;
        a[base + j + len / 2] = u - v;
        w *= step;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / n;
    for (auto& x : a) x *= scale;
  }
}

// Real convolution via one complex transform (u packed into the real part,
// v into the imaginary part).
std::vector<double> convolve(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t need = u.size() + v.size() - 1;
  std::size_t sz = 1;
  while (sz < need) sz <<= 1;
  std::vector<std::complex<double>> f(sz, {0.0, 0.0});
  for (std::size_t i = 0; i < u.size(); ++i) f[i] += std::complex<double>(u[i], 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) f[i] += std::complex<double>(0.0, v[i]);
  fft_inplace(f, false);
  std::vector<std::complex<double>> g(sz);
  const std::size_t mask = sz - 1;
  for (std::size_t k = 0; k < sz; ++k) {
    const std::complex<double> fk = f[k];
    const std::complex<double> fnk = std::conj(f[(sz - k) & mask]);
    const std::complex<double> fu = (fk + fnk) * 0.5;
    const std::complex<double> fv = (fk - fnk) * std::complex<double>(0.0, -0.5);
    g[k] = fu * fv;
  }
  fft_inplace(g, true);
  std::vector<double> out(need);
  for (std::size_t i = 0; i < need; ++i) out[i] = g[i].real();
  return out;
}

}  // namespace

std::vector<double> occupancy_fast(int n, const HarmonicTable& ht) {
  check_range(n, ht, "occupancy_fast");
  std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
  a[n] = 1.0;
  if (n == 1) return a;
  std::vector<double> acc(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
  const std::vector<double> inv = reciprocal_table(n);
  constexpr int kCutoff = 128;

  // Divide-and-conquer over index blocks, higher indices first; a block's
  // finished w-values are pushed onto the lower block as one convolution
  // against the 1/(j-m) kernel before the lower block is solved.
  const std::function<void(int, int)> solve = [&](int lo, int hi) {
    if (lo == hi) {
      a[lo] = (lo == n) ? 1.0 : acc[lo];
      if (lo >= 2) w[lo] = a[lo] / ht.h(lo - 1);
      return;
    }
    const int mid = lo + (hi - lo) / 2;
    solve(mid + 1, hi);
    const int right = hi - mid;      // finished block size
    const int span = hi - lo;        // largest j - m difference
    if (right * (mid - lo + 1) <= kCutoff * kCutoff) {
      for (int m = lo; m <= mid; ++m) {
        double s = 0.0;
        for (int j = mid + 1; j <= hi; ++j) s += w[j] * inv[j - m];
        acc[m] += s;
      }
    } else {
      std::vector<double> ur(static_cast<std::size_t>(right));
      for (int t = 0; t < right; ++t) ur[t] = w[hi - t];  // reversed block
      std::vector<double> kern(static_cast<std::size_t>(span) + 1, 0.0);
      for (int d = 1; d <= span; ++d) kern[d] = inv[d];
      const std::vector<double> c = convolve(ur, kern);
      // sum_{j} w[j] inv[j-m] = c[(hi - m) ... ]: term j pairs ur[hi-j] with
      // kern[j-m], landing at index (hi - j) + (j - m) = hi - m.
      for (int m = lo; m <= mid; ++m) acc[m] += c[hi - m];
    }
    solve(lo, mid);
  };
  solve(1, n);
  return a;
}

double length_constant(const std::vector<double>& occ, const HarmonicTable& ht) {
  const int n = static_cast<int>(occ.size()) - 1;
  if (n < 2) throw std::domain_error("length_constant: need occupancy up to n >= 2");
  Neumaier acc;
  for (int m = 2; m <= n; ++m) acc.add(occ[m] / (static_cast<double>(m) * ht.h(m - 1)));
  return acc.value();
}

double length_constant_tail_estimate(int n) {
  if (n < 2) throw std::domain_error("length_constant_tail_estimate: need n >= 2");
  const ReferenceConstants kc;
  return (1.0 / kc.zeta2) / n;
}

FringePmf fringe_up_pmf(int i, const std::vector<double>& occ, const HarmonicTable& ht) {
  const int n = static_cast<int>(occ.size()) - 1;
  if (i < 1 || i >= n) throw std::domain_error("fringe_up_pmf: need 1 <= i < horizon");
  FringePmf out;
  out.from = i;
  out.pmf.assign(static_cast<std::size_t>(n) + 1, 0.0);
  Neumaier mass;
  const double ai = occ[i];
  for (int j = i + 1; j <= n; ++j) {
    const double two_sided = split_pmf(j, i, ht) + split_pmf(j, j - i, ht);
    const double q = (static_cast<double>(i) * occ[j]) / (static_cast<double>(j) * ai) * two_sided;
    out.pmf[j] = q;
    mass.add(q);
  }
  out.raw_mass = mass.value();
  out.truncation_mass = 1.0 - out.raw_mass;
  out.truncation_warning = out.truncation_mass > 0.05;
  if (out.raw_mass > 0.0) {
    for (double& q : out.pmf) q /= out.raw_mass;
  }
  return out;
}

FringeSample sample_fringe(int levels, const std::vector<double>& occ,
                           const HarmonicTable& ht, Rng& rng) {
  if (levels < 1) throw std::domain_error("sample_fringe: need at least one level");
  const int n = static_cast<int>(occ.size()) - 1;
  FringeSample out;
  out.sizes.push_back(1);
  int state = 1;
  for (int step = 0; step < levels; ++step) {
    if (state >= n) {
      out.truncated = true;
      break;
    }
    const FringePmf row = fringe_up_pmf(state, occ, ht);
    // Draw against the unrenormalized mass so that the probability the true
    // jump overshoots the horizon is (approximately) the truncated mass.
    const double u = rng.uniform01();
    if (u >= row.raw_mass) {
      out.truncated = true;
      break;
    }
    double cum = 0.0;
    int jumped = n;
    for (int j = state + 1; j <= n; ++j) {
      cum += row.pmf[j] * row.raw_mass;
      if (u < cum) {
        jumped = j;
        break;
      }
    }
    out.siblings.push_back(sample_dtcs(jumped - state, ht, rng));
    out.sibling_on_left.push_back(rng.coin() ? 1 : 0);
    out.sizes.push_back(jumped);
    state = jumped;
  }
  return out;
}

namespace {

void append_subtree(CladeTree& out, const CladeTree& src) {
  out.size.insert(out.size.end(), src.size.begin(), src.size.end());
  out.left.insert(out.left.end(), src.left.begin(), src.left.end());
  out.hold.insert(out.hold.end(), src.hold.begin(), src.hold.end());
}

// Emit (in preorder) the clade holding path level `level`: the sampled path
// node of that size with the level's sibling on its recorded side.
void emit_fringe_level(CladeTree& out, const FringeSample& s, int level) {
  if (level == 0) {
    out.size.push_back(1);
    out.left.push_back(0);
    out.hold.push_back(0.0);
    return;
  }
  const CladeTree& sib = s.siblings[level - 1];
  const bool sib_left = s.sibling_on_left[level - 1] != 0;
  const int below = s.sizes[level - 1];
  out.size.push_back(s.sizes[level]);
  out.left.push_back(sib_left ? sib.n_leaves() : below);
  out.hold.push_back(0.0);
  if (sib_left) {
    append_subtree(out, sib);
    emit_fringe_level(out, s, level - 1);
  } else {
    emit_fringe_level(out, s, level - 1);
    append_subtree(out, sib);
  }
}

}  // namespace

CladeTree fringe_to_clade_tree(const FringeSample& sample) {
  if (sample.sizes.empty()) throw std::domain_error("fringe_to_clade_tree: empty walk");
  CladeTree out;
  out.timed = false;
  emit_fringe_level(out, sample, static_cast<int>(sample.sizes.size()) - 1);
  return out;
}

DriftVariance drift_variance(int j) {
  if (j < 2) throw std::domain_error("drift_variance: need j >= 2");
  const double logj = std::log(static_cast<double>(j));
  Neumaier sa, sb;
  for (int i = 1; i < j; ++i) {
    const double d = (std::log(static_cast<double>(i)) - logj) / (j - i);
    sa.add(d);
    sb.add(d * d * (j - i));
  }
  DriftVariance out;
  out.a = sa.value();
  out.b = sb.value();
  return out;
}

std::vector<double> c1_trend(const std::vector<double>& occ, const std::vector<int>& grid) {
  const int n = static_cast<int>(occ.size()) - 1;
  const ReferenceConstants kc;
  std::vector<double> out;
  out.reserve(grid.size());
  for (int j : grid) {
    if (j < 2 || j > n) throw std::domain_error("c1_trend: grid point outside occupancy range");
    out.push_back(kc.zeta2 * static_cast<double>(j) * occ[j] - std::log(static_cast<double>(j)));
  }
  return out;
}

std::vector<int> log_grid(int lo, int hi, int points) {
  if (lo < 1 || hi < lo || points < 1) throw std::domain_error("log_grid: bad range");
  std::vector<int> out;
  const double ratio = static_cast<double>(hi) / lo;
  for (int k = 0; k < points; ++k) {
    const double f = (points == 1) ? 0.0 : static_cast<double>(k) / (points - 1);
    const int j = static_cast<int>(std::lround(lo * std::pow(ratio, f)));
    if (out.empty() || j > out.back()) out.push_back(std::min(j, hi));
  }
  return out;
}

TwoLeafSample sample_two_leaf(int n, const HarmonicTable& ht, Rng& rng) {
  if (n < 2) throw std::domain_error("sample_two_leaf: need n >= 2");
  if (n > ht.n_max()) throw std::domain_error("sample_two_leaf: n exceeds the harmonic table");
  double when = 0.0;
  int m = n;
  for (;;) {
    when += rng.exponential(ht.h(m - 1));
    const int i = sample_split(m, ht, rng);
    const double dm = m;
    const double di = i;
    const double both_left = di * (di - 1.0) / (dm * (dm - 1.0));
    const double both_right = (dm - di) * (dm - di - 1.0) / (dm * (dm - 1.0));
    const double u = rng.uniform01();
    if (u < both_left) {
      m = i;
    } else if (u < both_left + both_right) {
      m = m - i;
    } else {
      TwoLeafSample s;
      s.branchpoint = when;
      s.h1 = when + chain_absorption_time(i, ht, rng);
      s.h2 = when + chain_absorption_time(m - i, ht, rng);
      return s;
    }
  }
}

}  // namespace betasplit
