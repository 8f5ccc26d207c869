#include "wgqed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "wgqed/engine.hpp"
#include "wgqed/observables.hpp"

namespace wgqed {

std::uint64_t SectorKey::pack(Index config, std::vector<std::uint32_t> modes) {
  if (modes.size() > kSlots) throw std::length_error("more photons than sector key slots");
  if (config > 0xF) throw std::out_of_range("qubit configuration does not fit a sector key");
  std::sort(modes.begin(), modes.end());
  std::uint64_t key = config;
  for (Index j = 0; j < modes.size(); ++j) {
    key |= static_cast<std::uint64_t>(modes[j]) << (4 + kModeBits * j);
  }
  return key;
}

std::vector<std::uint32_t> SectorKey::modes(std::uint64_t key) {
  std::vector<std::uint32_t> out;
  constexpr std::uint64_t mask = (std::uint64_t{1} << kModeBits) - 1;
  for (int j = 0; j < kSlots; ++j) {
    const auto m = static_cast<std::uint32_t>((key >> (4 + kModeBits * j)) & mask);
    if (m != 0) out.push_back(m);
  }
  return out;
}

SectorBasis::SectorBasis(std::vector<std::uint64_t> keys) : keys_(std::move(keys)) {
  if (!std::is_sorted(keys_.begin(), keys_.end()) ||
      std::adjacent_find(keys_.begin(), keys_.end()) != keys_.end()) {
    throw std::invalid_argument("sector basis keys must be strictly increasing");
  }
}

Index SectorBasis::find(std::uint64_t key) const {
  const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return keys_.size();
  return static_cast<Index>(it - keys_.begin());
}

double SectorState::norm_squared() const {
  double n = 0.0;
  for (const auto& a : amplitudes) n += std::norm(a);
  return n;
}

namespace {

struct WindowMap {
  std::vector<Index> dims;
  Index system_slot = 0;
  // Mode id per slot; 0 for the system slot.
  std::vector<std::uint32_t> mode;
};

WindowMap window_map(const StepGate& gate, long k) {
  WindowMap m;
  m.dims = gate.dims();
  const long l = static_cast<long>(gate.delay_bins);
  for (Index j = 0; j < gate.roles.size(); ++j) {
    switch (gate.roles[j]) {
      case WindowRole::system:
        m.system_slot = j;
        m.mode.push_back(0);
        break;
      case WindowRole::delayed_left: m.mode.push_back(SectorKey::mode_id(k, false)); break;
      case WindowRole::delayed_right: m.mode.push_back(SectorKey::mode_id(k, true)); break;
      case WindowRole::current_left: m.mode.push_back(SectorKey::mode_id(k + l, false)); break;
      case WindowRole::current_right: m.mode.push_back(SectorKey::mode_id(k + l, true)); break;
    }
  }
  return m;
}

struct Entry {
  std::uint64_t rest;
  Index w;
  cplx amp;
};

std::vector<Entry> split_entries(const SectorState& in, const WindowMap& wm) {
  std::vector<Entry> entries;
  entries.reserve(in.amplitudes.size());
  std::vector<Index> digits(wm.dims.size());
  for (Index i = 0; i < in.basis.size(); ++i) {
    const std::uint64_t key = in.basis.key(i);
    std::fill(digits.begin(), digits.end(), 0);
    digits[wm.system_slot] = SectorKey::config(key);
    std::vector<std::uint32_t> rest;
    for (auto m : SectorKey::modes(key)) {
      const auto it = std::find(wm.mode.begin(), wm.mode.end(), m);
      if (it == wm.mode.end()) {
        rest.push_back(m);
      } else {
        const auto slot = static_cast<Index>(it - wm.mode.begin());
        if (++digits[slot] >= wm.dims[slot]) {
          throw std::overflow_error("bin occupation exceeds the photon cutoff");
        }
      }
    }
    Index w = 0;
    for (Index j = 0; j < digits.size(); ++j) w = w * wm.dims[j] + digits[j];
    entries.push_back({SectorKey::pack(0, std::move(rest)), w, in.amplitudes[i]});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.rest != b.rest ? a.rest < b.rest : a.w < b.w;
  });
  return entries;
}

using Emitted = std::vector<std::pair<std::uint64_t, cplx>>;

// Applies the gate to one group of entries sharing the same modes outside the window.
void apply_group(const Entry* first, const Entry* last, const StepGate& gate, const WindowMap& wm,
                 Emitted& out) {
  const BlockedGate& g = gate.gate;
  std::vector<Index> touched;
  for (const Entry* e = first; e != last; ++e) touched.push_back(g.block_of(e->w));
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

  const auto rest_modes = SectorKey::modes(first->rest);
  std::vector<Index> digits(wm.dims.size());
  for (Index b : touched) {
    const GateBlock& blk = g.blocks()[b];
    Vector x = Vector::Zero(static_cast<Eigen::Index>(blk.indices.size()));
    for (const Entry* e = first; e != last; ++e) {
      if (g.block_of(e->w) == b) x(static_cast<Eigen::Index>(g.row_in_block(e->w))) = e->amp;
    }
    const Vector y = blk.matrix * x;
    for (Index r = 0; r < blk.indices.size(); ++r) {
      const cplx v = y(static_cast<Eigen::Index>(r));
      if (v == cplx{}) continue;
      Index w = blk.indices[r];
      for (Index j = digits.size(); j-- > 0;) {
        digits[j] = w % wm.dims[j];
        w /= wm.dims[j];
      }
      auto modes = rest_modes;
      for (Index j = 0; j < digits.size(); ++j) {
        if (j == wm.system_slot) continue;
        for (Index c = 0; c < digits[j]; ++c) modes.push_back(wm.mode[j]);
      }
      out.emplace_back(SectorKey::pack(digits[wm.system_slot], std::move(modes)), v);
    }
  }
}

std::vector<std::pair<Index, Index>> group_ranges(const std::vector<Entry>& entries) {
  std::vector<std::pair<Index, Index>> ranges;
  Index start = 0;
  for (Index i = 1; i <= entries.size(); ++i) {
    if (i == entries.size() || entries[i].rest != entries[start].rest) {
      ranges.emplace_back(start, i);
      start = i;
    }
  }
  return ranges;
}

SectorState assemble(std::vector<Emitted>& parts, Index step) {
  Emitted all;
  Index total = 0;
  for (const auto& p : parts) total += p.size();
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::uint64_t> keys;
  SectorState s;
  keys.reserve(all.size());
  s.amplitudes.reserve(all.size());
  for (const auto& [k, v] : all) {
    keys.push_back(k);
    s.amplitudes.push_back(v);
  }
  s.basis = SectorBasis(std::move(keys));
  s.step = step;
  return s;
}

long check_time(const SectorState& in, const StepGate& gate) {
  const long k = static_cast<long>(in.step);
  if (k + static_cast<long>(gate.delay_bins) > SectorKey::kMaxTime) throw std::overflow_error("sector key time range exhausted");
  return k;
}

}  // namespace

SectorState sector_step_serial(const SectorState& in, const StepGate& gate) {
  const WindowMap wm = window_map(gate, check_time(in, gate));
  const auto entries = split_entries(in, wm);
  const auto ranges = group_ranges(entries);
  std::vector<Emitted> parts(1);
  for (const auto& [a, b] : ranges) {
    apply_group(entries.data() + a, entries.data() + b, gate, wm, parts[0]);
  }
  return assemble(parts, in.step + 1);
}

SectorState sector_step_parallel(const SectorState& in, const StepGate& gate) {
  const WindowMap wm = window_map(gate, check_time(in, gate));
  const auto entries = split_entries(in, wm);
  const auto ranges = group_ranges(entries);
  std::vector<Emitted> parts(ranges.size());
  const auto n = static_cast<std::ptrdiff_t>(ranges.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t g = 0; g < n; ++g) {
    const auto [a, b] = ranges[static_cast<Index>(g)];
    apply_group(entries.data() + a, entries.data() + b, gate, wm, parts[static_cast<Index>(g)]);
  }
  return assemble(parts, in.step + 1);
}

SectorSimulation::SectorSimulation(const PhysicalParams& params, const InitialState& initial,
                                   OracleOptions options)
    : SectorSimulation(params, initial, build_step_gate(params), options) {}

SectorSimulation::SectorSimulation(const PhysicalParams& params, const InitialState& initial,
                                   StepGate gate, OracleOptions options)
    : params_(params), options_(options), gate_(std::move(gate)) {
  params_.validate();
  if (options_.e_max < 0 || options_.e_max > SectorKey::kSlots) {
    throw std::invalid_argument("e_max must be in 0..4");
  }
  if (initial.n_qubits != params.n_qubits) {
    throw std::invalid_argument("initial state does not match the qubit count");
  }
  const int n0 = initial.definite_excitations();
  if (n0 < 0) throw std::invalid_argument("oracle needs an initial state with a definite excitation number");
  if (n0 > options_.e_max) throw std::invalid_argument("initial excitations exceed e_max");
  initial_excitations_ = n0;
  std::vector<std::uint64_t> keys;
  for (Index c = 0; c < initial.amplitudes.size(); ++c) {
    if (initial.amplitudes[c] == cplx{}) continue;
    keys.push_back(SectorKey::pack(c, {}));
    state_.amplitudes.push_back(initial.amplitudes[c]);
  }
  state_.basis = SectorBasis(std::move(keys));
}

void SectorSimulation::step() {
  state_ = options_.execution.parallel ? sector_step_parallel(state_, gate_)
                                       : sector_step_serial(state_, gate_);
  if (state_.basis.size() > options_.max_states) {
    throw std::overflow_error("sector basis grew beyond " + std::to_string(options_.max_states) +
                              " states");
  }
}

namespace {

// Entropy in bits of the bipartition (qubits + loop modes | released modes),
// assembled sector by sector in the excitation number of the first half.
// `loop_begin` is in key time.
double cut_entropy(const SectorState& st, long loop_begin) {
  struct Part {
    std::uint64_t a;
    std::uint64_t b;
    cplx amp;
  };
  std::map<int, std::vector<Part>> sectors;
  for (Index i = 0; i < st.basis.size(); ++i) {
    const auto key = st.basis.key(i);
    std::vector<std::uint32_t> loop;
    std::vector<std::uint32_t> released;
    for (auto m : SectorKey::modes(key)) {
      (SectorKey::mode_time(m) >= loop_begin ? loop : released).push_back(m);
    }
    const int n_a = popcount(SectorKey::config(key)) + static_cast<int>(loop.size());
    sectors[n_a].push_back({SectorKey::pack(SectorKey::config(key), std::move(loop)),
                            SectorKey::pack(0, std::move(released)), st.amplitudes[i]});
  }
  std::vector<double> weights;
  for (auto& [n, parts] : sectors) {
    std::vector<std::uint64_t> as;
    std::vector<std::uint64_t> bs;
    for (const auto& p : parts) {
      as.push_back(p.a);
      bs.push_back(p.b);
    }
    for (auto* v : {&as, &bs}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    // Gram matrix on the smaller side, summed over the other side's index.
    const bool on_a = as.size() <= bs.size();
    const auto& rows = on_a ? as : bs;
    if (rows.size() > 8000) throw std::overflow_error("bipartition too large for the oracle");
    std::sort(parts.begin(), parts.end(), [on_a](const Part& x, const Part& y) {
      const auto kx = on_a ? x.b : x.a;
      const auto ky = on_a ? y.b : y.a;
      return kx != ky ? kx < ky : (on_a ? x.a < y.a : x.b < y.b);
    });
    const auto row = [&](const Part& p) {
      const auto k = on_a ? p.a : p.b;
      return static_cast<Eigen::Index>(std::lower_bound(rows.begin(), rows.end(), k) - rows.begin());
    };
    const auto rows_n = static_cast<Eigen::Index>(rows.size());
    Matrix gram = Matrix::Zero(rows_n, rows_n);
    Index start = 0;
    for (Index i = 1; i <= parts.size(); ++i) {
      const auto other = [&](Index j) { return on_a ? parts[j].b : parts[j].a; };
      if (i < parts.size() && other(i) == other(start)) continue;
      for (Index x = start; x < i; ++x) {
        for (Index y = start; y < i; ++y) {
          gram(row(parts[x]), row(parts[y])) += parts[x].amp * std::conj(parts[y].amp);
        }
      }
      start = i;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    for (Eigen::Index j = 0; j < eig.eigenvalues().size(); ++j) {
      weights.push_back(eig.eigenvalues()(j));
    }
  }
  return entropy_bits(weights);
}

}  // namespace

Sample SectorSimulation::measure() const {
  const int nq = params_.n_qubits;
  const long k = static_cast<long>(state_.step);
  const long l = static_cast<long>(params_.delay_bins());
  const double dt = params_.dt;
  const long released = k - 1 - l;
  const auto rel_r = SectorKey::mode_id(released + l, true);
  const auto rel_l = SectorKey::mode_id(released + l, false);
  const auto incoming_r = SectorKey::mode_id(k, true);
  const Index sys_dim = Index{1} << nq;

  Sample s;
  s.t = static_cast<double>(k) * dt;
  Matrix rho = Matrix::Zero(static_cast<Eigen::Index>(sys_dim), static_cast<Eigen::Index>(sys_dim));
  double rel_n[2] = {0.0, 0.0};
  double rel_pairs_r = 0.0;
  s.corr_af.assign(static_cast<Index>(nq), cplx{});
  const auto& basis = state_.basis;
  const auto& psi = state_.amplitudes;

  Index group_start = 0;
  for (Index i = 0; i < basis.size(); ++i) {
    const auto key = basis.key(i);
    const double p = std::norm(psi[i]);
    const auto modes = SectorKey::modes(key);
    const Index config = SectorKey::config(key);

    // Keys sharing the photon part are contiguous; they differ only in the config bits.
    if ((key >> 4) != (basis.key(group_start) >> 4)) group_start = i;
    for (Index j = group_start; j <= i; ++j) {
      const Index cj = SectorKey::config(basis.key(j));
      const cplx v = psi[i] * std::conj(psi[j]);
      rho(static_cast<Eigen::Index>(config), static_cast<Eigen::Index>(cj)) += v;
      if (j != i) rho(static_cast<Eigen::Index>(cj), static_cast<Eigen::Index>(config)) += std::conj(v);
    }

    Index n_rr = 0;
    Index n_rl = 0;
    Index n_in = 0;
    for (auto m : modes) {
      const long t = SectorKey::mode_time(m) - l;
      const bool right = SectorKey::mode_right(m);
      if (t < k - l) {
        (right ? s.Nout_R : s.Nout_L) += p;
      } else {
        (right ? s.Nin_R : s.Nin_L) += p;
      }
      if (m == rel_r) ++n_rr;
      if (m == rel_l) ++n_rl;
      if (l > 0 && m == incoming_r) ++n_in;
    }
    rel_n[0] += p * static_cast<double>(n_rl);
    rel_n[1] += p * static_cast<double>(n_rr);
    rel_pairs_r += p * static_cast<double>(n_rr * (n_rr > 0 ? n_rr - 1 : 0));

    if (n_rr > 0) {
      auto moved = modes;
      *std::find(moved.begin(), moved.end(), rel_r) = rel_l;
      const Index j = basis.find(SectorKey::pack(config, moved));
      if (j < basis.size()) {
        s.corr_LR += std::conj(psi[j]) * psi[i] *
                     std::sqrt(static_cast<double>(n_rr) * static_cast<double>(n_rl + 1));
      }
    }
    if (n_in > 0) {
      auto fewer = modes;
      fewer.erase(std::find(fewer.begin(), fewer.end(), incoming_r));
      for (int q = 0; q < nq; ++q) {
        const Index bit = Index{1} << (nq - 1 - q);
        if ((config & bit) != 0) continue;
        const Index j = basis.find(SectorKey::pack(config | bit, fewer));
        if (j < basis.size()) {
          s.corr_af[static_cast<Index>(q)] +=
              std::conj(psi[j]) * psi[i] * std::sqrt(static_cast<double>(n_in));
        }
      }
    }
  }
  s.norm = state_.norm_squared();

  const auto so = system_observables(rho, nq);
  s.n_tls = so.n_tls;
  s.probabilities = so.probabilities;
  s.corr_atoms = so.corr_atoms;
  s.S_a = so.entropy;
  s.S_c = cut_entropy(state_, k) / nq;
  if (k > 0) {
    s.nout_L = rel_n[0] / dt;
    s.nout_R = rel_n[1] / dt;
    s.g1_R = rel_n[1] / dt;
    s.g2_R = rel_pairs_r / (dt * dt);
    s.corr_LR /= dt;
  } else {
    s.corr_LR = 0.0;
  }
  for (auto& c : s.corr_af) c /= std::sqrt(dt);
  s.cons_residual = conservation_residual(s, initial_excitations_);
  return s;
}

ObservableSeries evolve_dense(const PhysicalParams& params, const InitialState& initial,
                              double horizon, Index stride, const OracleOptions& options) {
  if (stride == 0) throw std::invalid_argument("stride must be at least 1");
  params.validate();
  const Index steps = steps_for_horizon(horizon, params.dt);
  SectorSimulation sim(params, initial, options);
  ObservableSeries series;
  series.n_qubits = params.n_qubits;
  series.dt = params.dt;
  series.samples.push_back(sim.measure());
  for (Index s = 1; s <= steps; ++s) {
    sim.step();
    if (s % stride == 0) series.samples.push_back(sim.measure());
  }
  return series;
}

bool ComparisonReport::pass() const {
  return std::all_of(fields.begin(), fields.end(), [](const auto& f) { return f.pass; });
}

double ComparisonReport::max_abs() const {
  double m = 0.0;
  for (const auto& f : fields) m = std::max(m, f.max_abs);
  return m;
}

std::string ComparisonReport::summary() const {
  const FieldDeviation* worst = nullptr;
  for (const auto& f : fields) {
    if (worst == nullptr || f.max_abs > worst->max_abs) worst = &f;
  }
  std::ostringstream os;
  os << (pass() ? "pass" : "FAIL");
  if (worst != nullptr) {
    os << ", worst field " << worst->field << " max |dev| = " << worst->max_abs;
    if (worst->first_exceeding_t >= 0.0) os << " (first exceeds at t = " << worst->first_exceeding_t << ")";
  }
  return os.str();
}

ComparisonReport compare(const ObservableSeries& a, const ObservableSeries& b,
                         std::vector<std::string> fields, double tol) {
  if (a.samples.size() != b.samples.size() || a.n_qubits != b.n_qubits) {
    throw std::invalid_argument("series are on different grids");
  }
  for (Index i = 0; i < a.samples.size(); ++i) {
    if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9) {
      throw std::invalid_argument("series are on different grids");
    }
  }
  if (fields.empty()) {
    fields = a.columns();
    fields.erase(fields.begin());
  }
  ComparisonReport report;
  for (const auto& name : fields) {
    const auto xa = a.column(name);
    const auto xb = b.column(name);
    FieldDeviation d;
    d.field = name;
    for (Index i = 0; i < xa.size(); ++i) {
      const double dev = std::abs(xa[i] - xb[i]);
      if (!(dev <= tol) && d.first_exceeding_t < 0.0) {
        d.first_exceeding_t = a.samples[i].t;
        d.pass = false;
      }
      d.max_abs = std::max(d.max_abs, std::isnan(dev) ? INFINITY : dev);
    }
    report.fields.push_back(std::move(d));
  }
  return report;
}

}  // namespace wgqed
