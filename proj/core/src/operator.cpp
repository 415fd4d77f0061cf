#include "readop/operator.hpp"

#include <stdexcept>

namespace readop {

namespace {

constexpr long kIterateLimit = 256;
constexpr std::size_t kReportedMismatches = 20;

// 2^(num / (2 root)).
DyadicScalar half_root_power(const Int& num, const Int& root) {
  return DyadicScalar::pow2(make_ratio(num, 2 * root));
}

DyadicScalar dyadic_power(const DyadicScalar& x, long k) {
  DyadicScalar r(1);
  for (long j = 0; j < k; ++j) r = r * x;
  return r;
}

}  // namespace

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::T: return "T";
    case OperatorKind::D: return "D";
    case OperatorKind::Dinv: return "Dinv";
    case OperatorKind::SDirect: return "S_direct";
    case OperatorKind::SFormula: return "S_formula";
  }
  return "?";
}

SparseVec t_column(const BasisSystem& basis, const Int& i) {
  return basis.to_f(basis.f_in_e(i).shifted(Int(1)));
}

SparseVec s_column_direct(const BasisSystem& basis, const Int& i) {
  return basis.to_f(basis.f_in_ehat(i).shifted(Int(1)));
}

SparseVec s_column_formula(const Schedule& s, const Int& i) {
  const Region reg = s.classify(i);
  const long n = reg.n;
  const long r = reg.r;
  const Int next = i + 1;
  SparseVec out(BasisTag::F);

  if (reg.kind == RegionCase::Zero) {
    const Int a1 = s.a(1);
    out.add(next, half_root_power(2 - a1, s.sqrt_a(1)));
    return out;
  }

  const bool interior = i < reg.hi;
  switch (reg.kind) {
    case RegionCase::A: {
      if (interior) {
        out.add(next, ScalarSum(1));
        break;
      }
      // i = r a_n + v_{n-r}
      const Int v_low = s.v(n - r);
      const DyadicScalar lead = dyadic(s.a(n - r)) / DyadicScalar(r);
      DyadicScalar eps1;
      if (r < n) {
        eps1 = half_root_power(2 + 2 * v_low - s.a(n), s.sqrt_a(n));
      } else {
        eps1 = half_root_power(2 + 2 * n * s.a(n) - s.b(n), s.sqrt_b(n));
      }
      const DyadicScalar eps2 = half_root_power(2 + 2 * v_low - s.a(n - r + 1), s.sqrt_a(n - r + 1));
      out.add(next, lead * eps1);
      out.add(v_low + 1, -(lead * eps2));
      break;
    }
    case RegionCase::Bfirst:
    case RegionCase::B: {
      const Int root = s.sqrt_a(n);
      if (interior) {
        out.add(next, DyadicScalar::pow2(make_ratio(Int(1), root)));
        break;
      }
      // i = (r+1) a_n - 1
      const DyadicScalar c = half_root_power(2 - s.a(n), root);
      out.add(Int(0), c);
      out.add(next, c * DyadicScalar(r + 1) / dyadic(s.a(n - r - 1)));
      break;
    }
    case RegionCase::C: {
      if (interior) {
        out.add(next, ScalarSum(1));
        break;
      }
      // i = n a_n + r b_n
      const Int b = s.b(n);
      const DyadicScalar eps2 = half_root_power(2 + 2 * n * s.a(n) - b, s.sqrt_b(n));
      const DyadicScalar eps1 =
          r < n ? eps2 : half_root_power(2 + 2 * s.v(n) - s.a(n + 1), s.sqrt_a(n + 1));
      out.add(next, eps1);
      out.add(next - b, -(dyadic(b) * eps2));
      break;
    }
    case RegionCase::D: {
      const Int root = s.sqrt_b(n);
      if (interior) {
        out.add(next, DyadicScalar::pow2(make_ratio(Int(1), root)));
        break;
      }
      // i = (r+1)(a_n + b_n) - 1
      const Int a = s.a(n);
      const Int b = s.b(n);
      const DyadicScalar c = half_root_power(-(2 * (r + 1) * a + b - 2), root);
      const DyadicScalar bd = dyadic(b);
      DyadicScalar coeff = c;
      for (long j = 0; j <= r; ++j) {
        out.add(next - j * b, coeff);
        coeff = coeff * bd;
      }
      out.add(Int(0), coeff);
      out.add((r + 1) * a, coeff * DyadicScalar(r + 1) / dyadic(s.a(n - r - 1)));
      break;
    }
    case RegionCase::Zero: break;
  }
  return out;
}

SparseVec d_column(const Schedule& s, const Int& i) {
  return SparseVec::unit(BasisTag::F, i, ScalarSum(s.d_weight(i)));
}

SparseVec dinv_column(const Schedule& s, const Int& i) {
  return SparseVec::unit(BasisTag::F, i, ScalarSum(Rational(1) / s.d_weight(i)));
}

ColumnMap::ColumnMap(std::shared_ptr<const BasisSystem> basis, OperatorKind kind)
    : basis_(std::move(basis)), kind_(kind) {
  if (!basis_) throw std::invalid_argument("null basis system");
}

SparseVec ColumnMap::column(const Int& i) const {
  switch (kind_) {
    case OperatorKind::T: return t_column(*basis_, i);
    case OperatorKind::D: return d_column(basis_->schedule(), i);
    case OperatorKind::Dinv: return dinv_column(basis_->schedule(), i);
    case OperatorKind::SDirect: return s_column_direct(*basis_, i);
    case OperatorKind::SFormula: return s_column_formula(basis_->schedule(), i);
  }
  throw std::logic_error("unknown operator kind");
}

SparseVec ColumnMap::apply(const SparseVec& x) const {
  if (x.tag() != BasisTag::F) throw std::invalid_argument("operators act on f-basis vectors");
  SparseVec out(BasisTag::F);
  for (const auto& [i, c] : x.entries()) out += c * column(i);
  return out;
}

SparseVec apply_power(const ColumnMap& op, const SparseVec& x, const Int& k, PowerMethod method) {
  if (sgn(k) < 0) throw std::invalid_argument("negative power");
  if (x.tag() != BasisTag::F) throw std::invalid_argument("operators act on f-basis vectors");
  if (sgn(k) == 0) return x;

  const OperatorKind kind = op.kind();
  if (kind == OperatorKind::D || kind == OperatorKind::Dinv) {
    if (!fits_long(k)) throw std::invalid_argument("diagonal power too large");
    const long kk = k.get_si();
    SparseVec out(BasisTag::F);
    for (const auto& [i, c] : x.entries()) {
      Rational w = op.basis().schedule().d_weight(i);
      if (kind == OperatorKind::Dinv) w = 1 / w;
      DyadicScalar wk = dyadic_power(DyadicScalar(w), kk);
      out.add(i, c * wk);
    }
    return out;
  }

  if (method == PowerMethod::Auto) method = k <= kIterateLimit ? PowerMethod::Iterate : PowerMethod::Orbit;
  if (method == PowerMethod::Iterate) {
    SparseVec y = x;
    for (Int step = 0; step < k; ++step) y = op.apply(y);
    return y;
  }
  const BasisTag orbit = kind == OperatorKind::T ? BasisTag::E : BasisTag::EHat;
  const BasisSystem& basis = op.basis();
  return basis.to_f(basis.from_f(x, orbit).shifted(k));
}

ConjugationReport verify_conjugation(const BasisSystem& basis, const Int& lo, const Int& hi) {
  ConjugationReport rep;
  rep.lo = lo;
  rep.hi = hi;
  for (Int i = lo; i <= hi; ++i) {
    ++rep.checked;
    if (!(s_column_direct(basis, i) == s_column_formula(basis.schedule(), i))) {
      ++rep.mismatch_count;
      if (rep.mismatches.size() < kReportedMismatches) rep.mismatches.push_back(i);
    }
  }
  return rep;
}

ColumnNormReport column_norms(const Schedule& s, const Int& lo, const Int& hi, int precision_bits) {
  ColumnNormReport rep;
  rep.lo = lo;
  rep.hi = hi;
  for (Int i = lo; i <= hi; ++i) {
    Magnitude m = norm_l1(s_column_formula(s, i), precision_bits);
    if (rep.columns.empty() || m > rep.max) {
      rep.max = m;
      rep.argmax = i;
    }
    rep.columns.push_back({i, std::move(m)});
  }
  if (rep.columns.empty()) {
    rep.bound_ok = true;
    return rep;
  }
  const Real tol = Real::pow2(-149, 64);
  for (const auto& c : rep.columns) {
    if (c.norm.is_zero() || rep.max.is_zero()) continue;
    if (abs(rep.max.log2() - c.norm.log2()) <= tol) rep.near_max.push_back(c.i);
  }
  rep.bound_ok = rep.max.is_zero() || rep.max.log2() <= Real::from_long(1, 64);
  return rep;
}

RowReport row_entries(const Schedule& s, const Int& row, const Int& lo, const Int& hi, int precision_bits) {
  RowReport rep;
  rep.row = row;
  rep.lo = lo;
  rep.hi = hi;
  for (Int i = lo; i <= hi; ++i) {
    ScalarSum c = s_column_formula(s, i).coefficient(row);
    if (c.is_zero()) continue;
    RowEntry e;
    e.i = i;
    e.generation = s.generation(i);
    e.magnitude = c.magnitude(precision_bits);
    e.coefficient = std::move(c);
    if (rep.per_generation.empty() || rep.per_generation.back().generation != e.generation) {
      rep.per_generation.push_back({e.generation, e.i, e.magnitude});
    } else if (e.magnitude > rep.per_generation.back().max) {
      rep.per_generation.back().max = e.magnitude;
      rep.per_generation.back().argmax = e.i;
    }
    rep.entries.push_back(std::move(e));
  }
  for (std::size_t g = 1; g < rep.per_generation.size(); ++g) {
    const Real drop = rep.per_generation[g - 1].max.log2() - rep.per_generation[g].max.log2();
    if (drop.sign() <= 0) rep.decreasing = false;
    if (!rep.min_log2_drop || drop < *rep.min_log2_drop) rep.min_log2_drop = drop;
  }
  return rep;
}

}  // namespace readop
