#include "readop/basis.hpp"

#include <cstdlib>
#include <mutex>
#include <stdexcept>

namespace readop {

namespace {

constexpr std::size_t kMaxCachedExpansions = std::size_t{1} << 18;
// Expansions at indices wider than this are recomputed rather than cached.
constexpr std::uint64_t kMaxCachedIndexBits = 4096;

}  // namespace

const char* to_string(BasisTag tag) {
  switch (tag) {
    case BasisTag::F: return "f";
    case BasisTag::E: return "e";
    case BasisTag::EHat: return "ehat";
  }
  return "?";
}

BasisTag parse_basis_tag(std::string_view text) {
  if (text == "f") return BasisTag::F;
  if (text == "e") return BasisTag::E;
  if (text == "ehat") return BasisTag::EHat;
  throw std::invalid_argument("unknown basis tag: " + std::string(text));
}

SparseVec SparseVec::unit(BasisTag tag, const Int& i, ScalarSum coefficient) {
  SparseVec v(tag);
  v.add(i, coefficient);
  return v;
}

void SparseVec::add(const Int& i, const ScalarSum& c) {
  if (c.is_zero()) return;
  if (sgn(i) < 0) throw std::invalid_argument("negative index in sparse vector");
  auto [it, inserted] = entries_.try_emplace(i, c);
  if (inserted) return;
  it->second += c;
  if (it->second.is_zero()) entries_.erase(it);
}

ScalarSum SparseVec::coefficient(const Int& i) const {
  auto it = entries_.find(i);
  return it == entries_.end() ? ScalarSum() : it->second;
}

const Int& SparseVec::min_index() const {
  if (entries_.empty()) throw std::logic_error("min_index of zero vector");
  return entries_.begin()->first;
}

const Int& SparseVec::max_index() const {
  if (entries_.empty()) throw std::logic_error("max_index of zero vector");
  return entries_.rbegin()->first;
}

std::vector<Int> SparseVec::support() const {
  std::vector<Int> out;
  out.reserve(entries_.size());
  for (const auto& [i, c] : entries_) out.push_back(i);
  return out;
}

void SparseVec::require_same_tag(const SparseVec& o) const {
  if (tag_ != o.tag_) {
    throw std::invalid_argument(std::string("basis mismatch: ") + readop::to_string(tag_) + " vs " +
                                readop::to_string(o.tag_));
  }
}

SparseVec& SparseVec::operator+=(const SparseVec& o) {
  require_same_tag(o);
  for (const auto& [i, c] : o.entries_) add(i, c);
  return *this;
}

SparseVec& SparseVec::operator-=(const SparseVec& o) {
  require_same_tag(o);
  for (const auto& [i, c] : o.entries_) add(i, -c);
  return *this;
}

SparseVec& SparseVec::operator*=(const DyadicScalar& c) {
  if (c.is_zero()) {
    entries_.clear();
    return *this;
  }
  for (auto& [i, x] : entries_) x *= c;
  return *this;
}

SparseVec& SparseVec::operator*=(const ScalarSum& c) {
  if (auto m = c.as_monomial()) return *this *= *m;
  for (auto it = entries_.begin(); it != entries_.end();) {
    it->second = it->second * c;
    it = it->second.is_zero() ? entries_.erase(it) : std::next(it);
  }
  return *this;
}

SparseVec SparseVec::shifted(const Int& shift) const {
  SparseVec out(tag_);
  for (const auto& [i, c] : entries_) {
    Int j = i + shift;
    if (sgn(j) < 0) throw std::invalid_argument("shift moves index below zero");
    out.entries_.emplace_hint(out.entries_.end(), std::move(j), c);
  }
  return out;
}

std::string SparseVec::to_string() const {
  std::string out = readop::to_string(tag_);
  out += '[';
  bool first = true;
  for (const auto& [i, c] : entries_) {
    if (!first) out += ", ";
    first = false;
    out += '(';
    out += format_int(i);
    out += ", ";
    out += c.to_string();
    out += ')';
  }
  out += ']';
  return out;
}

SparseVec SparseVec::parse(std::string_view text) {
  const auto open = text.find('[');
  if (open == std::string_view::npos || text.back() != ']') {
    throw std::invalid_argument("bad sparse vector: " + std::string(text));
  }
  SparseVec v(parse_basis_tag(text.substr(0, open)));
  std::size_t pos = open + 1;
  const std::size_t end = text.size() - 1;
  while (pos < end) {
    if (text[pos] == ',' || text[pos] == ' ') {
      ++pos;
      continue;
    }
    if (text[pos] != '(') throw std::invalid_argument("bad sparse vector entry near: " + std::string(text.substr(pos)));
    const auto comma = text.find(", ", pos);
    if (comma == std::string_view::npos) throw std::invalid_argument("bad sparse vector entry");
    int depth = 1;
    std::size_t k = comma + 2;
    for (; k < end && depth > 0; ++k) {
      if (text[k] == '(') ++depth;
      if (text[k] == ')') --depth;
    }
    if (depth != 0) throw std::invalid_argument("unbalanced sparse vector entry");
    const Int index = parse_int(text.substr(pos + 1, comma - pos - 1));
    if (v.entries_.count(index)) throw std::invalid_argument("duplicate index in sparse vector");
    v.add(index, ScalarSum::parse(text.substr(comma + 2, k - 1 - (comma + 2))));
    pos = k;
  }
  return v;
}

// ---------------------------------------------------------------------------

DyadicScalar dyadic(const Int& x) {
  if (sgn(x) > 0 && is_power_of_two(x)) return DyadicScalar::pow2(Rational(Int(bit_length(x) - 1)));
  return DyadicScalar(Rational(x));
}

Rational centre_exponent(const Schedule& s, const Region& reg, const Int& i) {
  Int root;
  switch (reg.kind) {
    case RegionCase::Bfirst:
    case RegionCase::B: root = s.sqrt_a(reg.n); break;
    case RegionCase::D: root = s.sqrt_b(reg.n); break;
    default: throw std::logic_error("centre exponent requested outside Bfirst/B/D");
  }
  // h has denominator 1 or 2.
  const Int& hd = reg.h.get_den();
  Int num = reg.h.get_num() - i * hd;
  return make_ratio(num, hd * root);
}

BasisSystem::BasisSystem(std::shared_ptr<const Schedule> schedule) : schedule_(std::move(schedule)) {
  if (!schedule_) throw std::invalid_argument("null schedule");
}

SparseVec BasisSystem::f_in_system(const Int& i, bool hat) const {
  const BasisTag tag = hat ? BasisTag::EHat : BasisTag::E;
  const Schedule& s = *schedule_;
  const Region reg = s.classify(i);
  SparseVec out(tag);
  switch (reg.kind) {
    case RegionCase::Zero:
      out.add(i, ScalarSum(1));
      break;
    case RegionCase::A: {
      DyadicScalar c = dyadic(s.a(reg.n - reg.r));
      if (hat) c = c / DyadicScalar(reg.r);
      out.add(i, c);
      out.add(i - reg.r * s.a(reg.n), -c);
      break;
    }
    case RegionCase::Bfirst:
    case RegionCase::B:
    case RegionCase::D:
      out.add(i, DyadicScalar::pow2(centre_exponent(s, reg, i)));
      break;
    case RegionCase::C: {
      const Int b = s.b(reg.n);
      out.add(i, ScalarSum(1));
      out.add(i - b, -dyadic(b));
      break;
    }
  }
  return out;
}

SparseVec BasisSystem::f_in_e(const Int& i) const { return f_in_system(i, false); }
SparseVec BasisSystem::f_in_ehat(const Int& i) const { return f_in_system(i, true); }

SparseVec BasisSystem::expand(const Int& i, bool hat) const {
  auto& cache = hat ? ehat_cache_ : e_cache_;
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache.find(i); it != cache.end()) return it->second;
  }
  const Schedule& s = *schedule_;
  const Region reg = s.classify(i);
  SparseVec out(BasisTag::F);
  switch (reg.kind) {
    case RegionCase::Zero:
      out.add(i, ScalarSum(1));
      break;
    case RegionCase::A: {
      const Int a_low = s.a(reg.n - reg.r);
      out = expand(i - reg.r * s.a(reg.n), hat);
      DyadicScalar c = dyadic(a_low).inverse();
      if (hat) c = c * DyadicScalar(reg.r);
      out.add(i, c);
      break;
    }
    case RegionCase::Bfirst:
    case RegionCase::B:
    case RegionCase::D:
      out.add(i, DyadicScalar::pow2(-centre_exponent(s, reg, i)));
      break;
    case RegionCase::C: {
      const Int b = s.b(reg.n);
      out = expand(i - b, hat);
      out *= dyadic(b);
      out.add(i, ScalarSum(1));
      break;
    }
  }
  if (bit_length(i) > kMaxCachedIndexBits) return out;
  std::unique_lock lock(mutex_);
  if (e_cache_.size() + ehat_cache_.size() >= kMaxCachedExpansions) {
    e_cache_.clear();
    ehat_cache_.clear();
  }
  cache.try_emplace(i, out);
  return out;
}

SparseVec BasisSystem::e_in_f(const Int& i) const { return expand(i, false); }
SparseVec BasisSystem::ehat_in_f(const Int& i) const { return expand(i, true); }

SparseVec BasisSystem::to_f(const SparseVec& x) const {
  if (x.tag() == BasisTag::F) return x;
  const bool hat = x.tag() == BasisTag::EHat;
  SparseVec out(BasisTag::F);
  for (const auto& [i, c] : x.entries()) out += c * expand(i, hat);
  return out;
}

SparseVec BasisSystem::from_f(const SparseVec& x, BasisTag target) const {
  if (x.tag() != BasisTag::F) throw std::invalid_argument("from_f expects an f-basis vector");
  if (target == BasisTag::F) return x;
  const bool hat = target == BasisTag::EHat;
  SparseVec out(target);
  for (const auto& [i, c] : x.entries()) out += c * f_in_system(i, hat);
  return out;
}

std::size_t BasisSystem::cache_size() const {
  std::shared_lock lock(mutex_);
  return e_cache_.size() + ehat_cache_.size();
}

void BasisSystem::clear_cache() const {
  std::unique_lock lock(mutex_);
  e_cache_.clear();
  ehat_cache_.clear();
}

Magnitude norm_l1(const SparseVec& x, int precision_bits) {
  if (x.tag() != BasisTag::F) throw std::invalid_argument("norm_l1 needs an f-basis vector");
  // Linear accumulation when every exponent is moderate; log domain otherwise.
  bool linear = true;
  for (const auto& [i, c] : x.entries()) {
    for (const auto& t : c.terms()) {
      const Int f = floor_of(t.exponent());
      if (!f.fits_slong_p() || std::abs(f.get_si()) > (1L << 20)) linear = false;
    }
    if (!linear) break;
  }
  if (linear) {
    const mpfr_prec_t work = precision_bits + 32 + static_cast<mpfr_prec_t>(bit_length(Int(x.size() + 1)));
    Real acc(work);
    for (const auto& [i, c] : x.entries()) acc += abs(c.to_real(work));
    return Magnitude::from_real(acc.with_precision(precision_bits + 16));
  }
  Magnitude total;
  for (const auto& [i, c] : x.entries()) total += c.magnitude(precision_bits);
  return total;
}

}  // namespace readop
