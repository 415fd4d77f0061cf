#include "readop/schedule.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace readop {

namespace {

// Entries whose b_n has more bits than this are cached in a small bounded map.
constexpr std::uint64_t kBigEntryBits = std::uint64_t{1} << 20;
constexpr std::size_t kBigCacheCapacity = 8;

Int parse_entry(const nlohmann::json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) return Int(j.get<long>());
  if (j.is_string()) return parse_int(j.get<std::string>());
  throw std::invalid_argument("schedule entry must be an integer or a string");
}

}  // namespace

std::uint64_t TailFormula::a_exponent(long n) const {
  const auto m = static_cast<std::uint64_t>(n + offset);
  return 2 * m * m * static_cast<std::uint64_t>(alpha);
}

std::uint64_t TailFormula::b_exponent(long n) const {
  const auto m = static_cast<std::uint64_t>(n + offset);
  return a_exponent(n) + 2 * m * static_cast<std::uint64_t>(beta);
}

const char* to_string(RegionCase c) {
  switch (c) {
    case RegionCase::Zero: return "Zero";
    case RegionCase::Bfirst: return "Bfirst";
    case RegionCase::A: return "A";
    case RegionCase::B: return "B";
    case RegionCase::C: return "C";
    case RegionCase::D: return "D";
  }
  return "?";
}

std::string Region::to_string() const {
  std::ostringstream out;
  out << readop::to_string(kind);
  switch (kind) {
    case RegionCase::Zero: break;
    case RegionCase::Bfirst: out << "(n=" << n << ", h=" << format_rational(h) << ")"; break;
    case RegionCase::A:
    case RegionCase::C: out << "(n=" << n << ", r=" << r << ")"; break;
    case RegionCase::B:
    case RegionCase::D: out << "(n=" << n << ", r=" << r << ", h=" << format_rational(h) << ")"; break;
  }
  return out.str();
}

bool ValidationReport::passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

Schedule::Schedule(std::vector<std::pair<Int, Int>> head, std::optional<TailFormula> tail, bool square_flag)
    : head_(std::move(head)), tail_(tail), square_flag_(square_flag) {
  for (const auto& [a, b] : head_) {
    if (sgn(a) <= 0 || sgn(b) <= 0) throw std::invalid_argument("schedule entries must be positive");
  }
  if (tail_) {
    if (tail_->alpha < 1 || tail_->beta < 1) throw std::invalid_argument("tail alpha and beta must be >= 1");
    if (head_size() + 1 + tail_->offset < 1) throw std::invalid_argument("tail offset makes n + c < 1");
  }
  if (head_.empty() && !tail_) throw std::invalid_argument("empty schedule");
}

Schedule::Schedule(const Schedule& other)
    : head_(other.head_), tail_(other.tail_), square_flag_(other.square_flag_) {}

Schedule Schedule::fixture() {
  return Schedule({{Int(4), Int(324)}, {Int(900), Int(10000)}, {pow2(30), pow2(36)}},
                  TailFormula{1, 1, 1}, true);
}

Schedule Schedule::naive() {
  return Schedule({{Int(4), Int(16)}, {Int(64), Int(256)}, {Int(1024), Int(4096)}}, std::nullopt, true);
}

Schedule Schedule::from_json_text(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  std::vector<std::pair<Int, Int>> head;
  for (const auto& pair : doc.at("head")) {
    if (!pair.is_array() || pair.size() != 2) throw std::invalid_argument("head entries must be [a, b] pairs");
    head.emplace_back(parse_entry(pair[0]), parse_entry(pair[1]));
  }
  std::optional<TailFormula> tail;
  if (doc.contains("tail") && !doc["tail"].is_null()) {
    const auto& t = doc["tail"];
    tail = TailFormula{t.value("alpha", 1L), t.value("beta", 1L), t.value("offset", 0L)};
  }
  return Schedule(std::move(head), tail, doc.value("square_flag", true));
}

Schedule Schedule::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schedule file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string Schedule::to_json_text() const {
  nlohmann::json doc;
  doc["head"] = nlohmann::json::array();
  for (const auto& [a, b] : head_) doc["head"].push_back({format_int(a), format_int(b)});
  if (tail_) {
    doc["tail"] = {{"alpha", tail_->alpha}, {"beta", tail_->beta}, {"offset", tail_->offset}};
  } else {
    doc["tail"] = nullptr;
  }
  doc["square_flag"] = square_flag_;
  return doc.dump();
}

std::string Schedule::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void Schedule::require_defined(long n) const {
  if (!defined_at(n)) {
    throw ScheduleRangeError("schedule undefined at generation " + std::to_string(n));
  }
}

Int Schedule::raw_a(long n) const {
  if (n == 0) return Int(1);
  if (n <= head_size()) return head_[n - 1].first;
  return pow2(tail_->a_exponent(n));
}

Int Schedule::raw_b(long n) const {
  if (n == 0) return Int(0);
  if (n <= head_size()) return head_[n - 1].second;
  return pow2(tail_->b_exponent(n));
}

std::shared_ptr<const Schedule::Entry> Schedule::entry(long n) const {
  require_defined(n);
  {
    std::shared_lock lock(mutex_);
    if (auto it = cache_.find(n); it != cache_.end()) return it->second;
    if (auto it = big_cache_.find(n); it != big_cache_.end()) return it->second;
  }
  auto e = std::make_shared<Entry>();
  e->a = raw_a(n);
  e->b = raw_b(n);
  e->v = n * (e->a + e->b);
  const bool tail_entry = n > head_size();
  if (tail_entry) {
    e->sqrt_a = pow2(tail_->a_exponent(n) / 2);
    e->sqrt_b = pow2(tail_->b_exponent(n) / 2);
    e->have_sqrt_a = e->have_sqrt_b = true;
  } else {
    if (auto s = exact_sqrt(e->a)) {
      e->sqrt_a = *s;
      e->have_sqrt_a = true;
    }
    if (n > 0) {
      if (auto s = exact_sqrt(e->b)) {
        e->sqrt_b = *s;
        e->have_sqrt_b = true;
      }
    }
  }
  std::unique_lock lock(mutex_);
  if (bit_length(e->b) > kBigEntryBits) {
    if (big_cache_.size() >= kBigCacheCapacity) big_cache_.erase(big_cache_.begin());
    big_cache_.emplace(n, e);
  } else {
    cache_.emplace(n, e);
  }
  return e;
}

Int Schedule::a(long n) const { return entry(n)->a; }
Int Schedule::b(long n) const { return entry(n)->b; }
Int Schedule::v(long n) const { return entry(n)->v; }

Int Schedule::sqrt_a(long n) const {
  auto e = entry(n);
  if (!e->have_sqrt_a) throw std::domain_error("a_" + std::to_string(n) + " is not a perfect square");
  return e->sqrt_a;
}

Int Schedule::sqrt_b(long n) const {
  auto e = entry(n);
  if (!e->have_sqrt_b) throw std::domain_error("b_" + std::to_string(n) + " is not a perfect square");
  return e->sqrt_b;
}

Real Schedule::a_real(long n, mpfr_prec_t precision) const {
  require_defined(n);
  if (n > head_size()) return Real::pow2(static_cast<long>(tail_->a_exponent(n)), precision);
  return Real::from_int(raw_a(n), precision);
}

Real Schedule::b_real(long n, mpfr_prec_t precision) const {
  require_defined(n);
  if (n > head_size()) return Real::pow2(static_cast<long>(tail_->b_exponent(n)), precision);
  return Real::from_int(raw_b(n), precision);
}

int Schedule::compare_with_v(const Int& i, long n) const {
  if (n == 0) return sgn(i);
  require_defined(n);
  if (n > head_size()) {
    const std::uint64_t lead = tail_->b_exponent(n) + bit_length(Int(n));
    const std::uint64_t bits = bit_length(i);
    // n*2^eb <= v_n < 2^(lead+1)
    if (bits < lead) return -1;
    if (bits > lead + 1) return 1;
  }
  return cmp(i, v(n));
}

long Schedule::generation(const Int& i) const {
  if (sgn(i) < 0) throw std::invalid_argument("negative index");
  if (sgn(i) == 0) return 0;
  long lo = 0;  // v(lo) < i
  long hi = 1;
  while (true) {
    if (!tail_ && hi > head_size()) {
      hi = head_size();
      if (compare_with_v(i, hi) > 0) {
        throw ScheduleRangeError("index " + summarize_int(i) + " beyond the schedule (v_" +
                                 std::to_string(hi) + ")");
      }
      break;
    }
    if (compare_with_v(i, hi) <= 0) break;
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (compare_with_v(i, mid) <= 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Region Schedule::classify(const Int& i) const {
  const long n = generation(i);
  Region reg;
  reg.n = n;
  if (n == 0) {
    reg.kind = RegionCase::Zero;
    reg.lo = reg.hi = 0;
    return reg;
  }
  const auto e = entry(n);
  const Int& a = e->a;
  const Int& b = e->b;
  if (i < a) {
    reg.kind = RegionCase::Bfirst;
    reg.lo = v(n - 1) + 1;
    reg.hi = a - 1;
    reg.h = make_ratio(a, Int(2));
    return reg;
  }
  const Int na = n * a;
  if (i <= na) {
    const Int r_big = i / a;
    const long r = r_big.get_si();
    const Int base = r_big * a;
    const Int vr = v(n - r);
    reg.r = r;
    if (i - base <= vr) {
      reg.kind = RegionCase::A;
      reg.lo = base;
      reg.hi = base + vr;
    } else {
      reg.kind = RegionCase::B;
      reg.lo = base + vr + 1;
      reg.hi = base + a - 1;
      reg.h = make_ratio((2 * r + 1) * a, Int(2));
    }
    return reg;
  }
  Int q_big = (i - na - 1) / b;
  const long q = q_big.get_si();
  const Int next_c = (q + 1) * (a + b);
  if (i < next_c) {
    reg.kind = RegionCase::D;
    reg.r = q;
    reg.lo = na + q * b + 1;
    reg.hi = next_c - 1;
    reg.h = make_ratio((2 * q + 1) * b, Int(2));
  } else {
    reg.kind = RegionCase::C;
    reg.r = q + 1;
    reg.lo = next_c;
    reg.hi = na + (q + 1) * b;
  }
  return reg;
}

std::vector<Region> Schedule::regions_of_generation(long n) const {
  if (n < 1) throw std::invalid_argument("generation must be >= 1");
  const Int a = this->a(n);
  const Int b = this->b(n);
  std::vector<Region> out;
  auto push = [&](RegionCase kind, long r, Rational h, Int lo, Int hi) {
    if (lo > hi) return;
    Region reg;
    reg.kind = kind;
    reg.n = n;
    reg.r = r;
    reg.h = std::move(h);
    reg.lo = std::move(lo);
    reg.hi = std::move(hi);
    out.push_back(std::move(reg));
  };
  push(RegionCase::Bfirst, 0, make_ratio(a, Int(2)), v(n - 1) + 1, a - 1);
  for (long r = 1; r <= n; ++r) {
    const Int vr = v(n - r);
    push(RegionCase::A, r, Rational(0), r * a, r * a + vr);
    if (r < n) push(RegionCase::B, r, make_ratio((2 * r + 1) * a, Int(2)), r * a + vr + 1, (r + 1) * a - 1);
  }
  for (long r = 0; r < n; ++r) {
    push(RegionCase::D, r, make_ratio((2 * r + 1) * b, Int(2)), n * a + r * b + 1, (r + 1) * (a + b) - 1);
    push(RegionCase::C, r + 1, Rational(0), (r + 1) * (a + b), n * a + (r + 1) * b);
  }
  return out;
}

Rational Schedule::d_weight(const Int& i) const {
  const Region reg = classify(i);
  if (reg.kind == RegionCase::A) return Rational(1, reg.r);
  return Rational(1);
}

ValidationReport Schedule::validate(long horizon) const {
  ValidationReport rep;
  if (horizon <= 0) horizon = tail_ ? head_size() + 4 : head_size();
  if (!tail_) horizon = std::min(horizon, head_size());
  rep.horizon = horizon;

  auto run = [&](const std::string& name, auto&& predicate) {
    ScheduleCheck c;
    c.name = name;
    for (long n = 1; n <= horizon; ++n) {
      std::string why;
      if (!predicate(n, why)) {
        c.passed = false;
        c.witness_n = n;
        c.detail = why;
        break;
      }
    }
    if (c.passed) c.detail = "holds for n = 1.." + std::to_string(horizon);
    rep.checks.push_back(std::move(c));
  };

  auto nm = [](const char* s, long n) { return std::string(s) + "_" + std::to_string(n); };

  run("strictly increasing", [&](long n, std::string& why) {
    const Int an = raw_a(n), bn = raw_b(n);
    if (n == 1 && an <= 1) {
      why = "a_1 = " + format_int(an) + " <= a_0 = 1";
      return false;
    }
    if (n > 1 && raw_b(n - 1) >= an) {
      why = nm("b", n - 1) + " = " + summarize_int(raw_b(n - 1)) + " >= " + nm("a", n) + " = " + summarize_int(an);
      return false;
    }
    if (an >= bn) {
      why = nm("a", n) + " = " + summarize_int(an) + " >= " + nm("b", n) + " = " + summarize_int(bn);
      return false;
    }
    return true;
  });
  run("a_n > v_{n-1}", [&](long n, std::string& why) {
    const Int an = raw_a(n);
    const Int vp = (n - 1) * (raw_a(n - 1) + raw_b(n - 1));
    if (an > vp) return true;
    why = nm("a", n) + " = " + summarize_int(an) + " <= " + nm("v", n - 1) + " = " + summarize_int(vp);
    return false;
  });
  run("b_n > (n-1) a_n", [&](long n, std::string& why) {
    const Int an = raw_a(n), bn = raw_b(n);
    if (bn > (n - 1) * an) return true;
    why = nm("b", n) + " = " + summarize_int(bn) + " <= (n-1) " + nm("a", n);
    return false;
  });
  if (square_flag_) {
    run("perfect squares", [&](long n, std::string& why) {
      if (n > head_size()) return true;  // tail exponents are even
      if (!exact_sqrt(raw_a(n))) {
        why = nm("a", n) + " is not a perfect square";
        return false;
      }
      if (!exact_sqrt(raw_b(n))) {
        why = nm("b", n) + " is not a perfect square";
        return false;
      }
      return true;
    });
  }
  run("boundary regions non-empty", [&](long n, std::string& why) {
    const Int an = raw_a(n), bn = raw_b(n);
    const Int vp = (n - 1) * (raw_a(n - 1) + raw_b(n - 1));
    if (an < vp + 2) {
      why = "B regions of generation " + std::to_string(n) + " are empty (a_n < v_{n-1} + 2)";
      return false;
    }
    if (bn < (n - 1) * an + 2) {
      why = "D(0) of generation " + std::to_string(n) + " is empty (b_n < (n-1) a_n + 2)";
      return false;
    }
    return true;
  });
  return rep;
}

}  // namespace readop
