#include "popsim/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "popsim/engine.hpp"
#include "popsim/masked_remainder.hpp"
#include "popsim/parallel.hpp"
#include "popsim/plain_remainder.hpp"
#include "popsim/remainder_oracle.hpp"
#include "popsim/rng.hpp"

namespace popsim {

double freshness_probability(std::uint32_t n) {
  if (n < 2) throw std::invalid_argument("freshness: population must have at least 2 agents");
  return static_cast<double>(n - 1) / static_cast<double>(2 * n - 3);
}

double freshness_estimate(std::uint32_t n, std::uint64_t trials, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("freshness: population must have at least 2 agents");
  std::vector<std::uint64_t> fresh(trials, 0);
  parallel_trials(trials, [&](std::uint64_t t) {
    Rng sched = derive_stream(trial_seed(seed, t), "scheduler");
    std::vector<char> seen(n, 0);
    for (;;) {
      auto [i, j] = select_pair(n, sched);
      if (i == 0 || j == 0) {
        std::uint32_t partner = i == 0 ? j : i;
        fresh[t] = seen[partner] ? 0 : 1;
        return;
      }
      seen[i] = seen[j] = 1;
    }
  });
  std::uint64_t hits = 0;
  for (auto f : fresh) hits += f;
  return static_cast<double>(hits) / static_cast<double>(trials);
}

namespace {

double tv_from_counts(const std::vector<std::uint32_t>& ca, const std::vector<std::uint32_t>& cb,
                      double na, double nb) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    acc += std::abs(static_cast<double>(ca[i]) / na - static_cast<double>(cb[i]) / nb);
  }
  return 0.5 * acc;
}

}  // namespace

TvTestResult tv_permutation_test(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b, std::size_t permutations,
                                 double quantile_level, std::uint64_t seed, unsigned threads) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("tv_permutation_test: insufficient samples");

  std::unordered_map<std::string, std::uint32_t> ids;
  ids.reserve(a.size() + b.size());
  auto intern = [&](const std::string& s) {
    auto [it, fresh] = ids.try_emplace(s, static_cast<std::uint32_t>(ids.size()));
    (void)fresh;
    return it->second;
  };
  std::vector<std::uint32_t> pool;
  pool.reserve(a.size() + b.size());
  for (const auto& s : a) pool.push_back(intern(s));
  for (const auto& s : b) pool.push_back(intern(s));

  const std::size_t bins = ids.size();
  const std::size_t na = a.size();
  const double da = static_cast<double>(na);
  const double db = static_cast<double>(b.size());

  std::vector<std::uint32_t> ca(bins, 0), cb(bins, 0);
  for (std::size_t i = 0; i < na; ++i) ++ca[pool[i]];
  for (std::size_t i = na; i < pool.size(); ++i) ++cb[pool[i]];
  const double observed = tv_from_counts(ca, cb, da, db);

  // Each permutation derives its own stream and shuffles a scratch copy, so
  // the null sample is independent of worker count.
  std::vector<double> null_tvs(permutations, 0.0);
  parallel_trials(permutations, [&](std::uint64_t p) {
    thread_local std::vector<std::uint32_t> scratch, sa, sb;
    scratch = pool;
    sa.assign(bins, 0);
    sb.assign(bins, 0);
    Rng rng = derive_stream(seed, "permutation-null", p);
    for (std::size_t i = scratch.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
      std::swap(scratch[i], scratch[j]);
    }
    for (std::size_t i = 0; i < na; ++i) ++sa[scratch[i]];
    for (std::size_t i = na; i < scratch.size(); ++i) ++sb[scratch[i]];
    null_tvs[p] = tv_from_counts(sa, sb, da, db);
  }, threads);
  std::size_t ge = 0;
  for (double t : null_tvs)
    if (t >= observed) ++ge;

  TvTestResult res;
  res.tv = observed;
  res.threshold = quantile(null_tvs, quantile_level);
  res.p_value = static_cast<double>(ge + 1) / static_cast<double>(permutations + 1);
  // Leaks when the observed distance sits beyond the null's quantile_level
  // tail, judged by the permutation p-value (ties count against leaking).
  res.leaks = res.p_value < 1.0 - quantile_level;
  return res;
}

namespace {

constexpr std::uint64_t kMaskedBudgetFactor = 20;

std::uint64_t masked_budget(std::uint32_t n) {
  double b = static_cast<double>(kMaskedBudgetFactor) * std::pow(static_cast<double>(n), 3.0) *
             std::log(static_cast<double>(n));
  return static_cast<std::uint64_t>(b);
}

std::vector<int> draw_inputs(std::uint32_t n, int k, std::uint32_t adversary, int adversary_input,
                             Rng& rng) {
  std::vector<int> inputs(n);
  for (std::uint32_t a = 0; a < n; ++a) inputs[a] = rng.zk(k);
  inputs[adversary] = adversary_input;
  return inputs;
}

struct FirstObs {
  bool captured = false;
  std::uint32_t partner = 0;
};

// Steps the population until the adversary's first interaction, recording
// who the partner was. The observation itself lands in the adversary's view.
template <class P>
FirstObs step_until_first_contact(Population<P>& pop, std::uint32_t adversary,
                                  std::uint64_t cap) {
  FirstObs out;
  while (pop.steps() < cap) {
    auto [rec, effective] = pop.step();
    (void)effective;
    if (rec.initiator == adversary || rec.responder == adversary) {
      out.captured = true;
      out.partner = rec.initiator == adversary ? rec.responder : rec.initiator;
      return out;
    }
  }
  return out;
}

AttackReport finish_accuracy_report(AttackReport rep, std::uint64_t hits, std::uint64_t kept) {
  rep.successes = kept;
  rep.baseline = 1.0 / static_cast<double>(rep.k);
  if (kept > 0) rep.accuracy = static_cast<double>(hits) / static_cast<double>(kept);
  double se = std::sqrt(rep.baseline * (1.0 - rep.baseline) / static_cast<double>(kept));
  rep.threshold = rep.baseline + 3.0 * se;
  rep.verdict = kept > 0 && rep.accuracy > rep.threshold ? "leaks" : "no-evidence";
  return rep;
}

}  // namespace

AttackReport first_partner_plain(std::uint32_t n, int k, int r, double p_m1,
                                 std::uint64_t trials, std::uint32_t adversary,
                                 std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("first_partner: insufficient samples");
  if (adversary >= n) throw std::invalid_argument("first_partner: adversary out of range");
  PlainRemainder proto(k, r, p_m1);
  std::vector<std::uint8_t> hit(trials, 0);
  std::vector<std::uint8_t> kept(trials, 0);
  parallel_trials(trials, [&](std::uint64_t t) {
    std::uint64_t ts = trial_seed(seed, t);
    Rng input_rng = derive_stream(ts, "trial-inputs");
    std::vector<int> inputs = draw_inputs(n, k, adversary, 0, input_rng);
    RunOptions opt;
    opt.record_views = true;
    opt.views_only_agent = adversary;
    Population<PlainRemainder> pop(proto, inputs, ts, opt);
    FirstObs obs = step_until_first_contact(pop, adversary, 64ull * n);
    if (!obs.captured) return;
    kept[t] = 1;
    const auto& view = pop.views()[adversary];
    zk_t seen = view.observations.front().partner.value;
    int guess;
    if (seen >= 0) {
      guess = seen;
    } else {
      Rng g = derive_stream(ts, "fallback-guess");
      guess = g.zk(k);
    }
    hit[t] = guess == inputs[obs.partner] ? 1 : 0;
  });
  std::uint64_t hits = 0, total = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    hits += hit[t];
    total += kept[t];
  }
  AttackReport rep;
  rep.protocol = "plain";
  rep.attack = "first-partner";
  rep.n = n;
  rep.k = k;
  rep.trials = trials;
  return finish_accuracy_report(std::move(rep), hits, total);
}

AttackReport first_partner_masked(std::uint32_t n, int k, int clock_phases,
                                  std::uint64_t trials, std::uint32_t adversary,
                                  std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("first_partner: insufficient samples");
  if (adversary >= n) throw std::invalid_argument("first_partner: adversary out of range");
  MaskedRemainder proto(k, clock_phases);
  const std::uint32_t leader = (adversary + 1) % n;
  const std::uint64_t budget = masked_budget(n);
  std::vector<std::uint8_t> hit(trials, 0);
  std::vector<std::uint8_t> kept(trials, 0);
  parallel_trials(trials, [&](std::uint64_t t) {
    std::uint64_t ts = trial_seed(seed, t);
    Rng input_rng = derive_stream(ts, "trial-inputs");
    std::vector<int> values = draw_inputs(n, k, adversary, 0, input_rng);
    std::vector<MaskedRemainder::Input> inputs(n);
    for (std::uint32_t a = 0; a < n; ++a) inputs[a] = {values[a], a == leader};
    RunOptions opt;
    opt.record_views = true;
    opt.views_only_agent = adversary;
    opt.check_interval = n;
    Population<MaskedRemainder> pop(proto, inputs, ts, opt);
    FirstObs obs = step_until_first_contact(pop, adversary, budget);
    if (!obs.captured) return;
    auto done = [](const Population<MaskedRemainder>& p) {
      for (const auto& s : p.config())
        if (is_bot(s.msg.out)) return false;
      return true;
    };
    RunStatus status = pop.run(budget, done);
    int expected = remainder_sum(values, k);
    bool correct = status.converged && pop.config()[0].msg.out == expected;
    if (!correct) return;  // privacy claims are scoped to successful runs
    kept[t] = 1;
    const auto& view = pop.views()[adversary];
    zk_t seen = view.observations.front().partner.mask;
    int guess;
    if (seen >= 0) {
      guess = seen;
    } else {
      Rng g = derive_stream(ts, "fallback-guess");
      guess = g.zk(k);
    }
    hit[t] = guess == values[obs.partner] ? 1 : 0;
  });
  std::uint64_t hits = 0, total = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    hits += hit[t];
    total += kept[t];
  }
  AttackReport rep;
  rep.protocol = "masked";
  rep.attack = "first-partner";
  rep.n = n;
  rep.k = k;
  rep.trials = trials;
  return finish_accuracy_report(std::move(rep), hits, total);
}

AttackReport first_partner_null(std::uint32_t n, int k, std::uint64_t trials,
                                std::uint64_t seed) {
  if (trials < 1000) throw std::invalid_argument("first_partner: insufficient samples");
  std::vector<std::uint8_t> hit(trials, 0);
  parallel_trials(trials, [&](std::uint64_t t) {
    Rng rng = derive_stream(trial_seed(seed, t), "null-attacker");
    int target = rng.zk(k);
    int guess = rng.zk(k);
    hit[t] = guess == target ? 1 : 0;
  });
  std::uint64_t hits = 0;
  for (auto h : hit) hits += h;
  AttackReport rep;
  rep.protocol = "null";
  rep.attack = "first-partner";
  rep.n = n;
  rep.k = k;
  rep.trials = trials;
  return finish_accuracy_report(std::move(rep), hits, trials);
}

namespace {

void check_view_dist_preconditions(const ViewDistConfig& cfg) {
  if (cfg.inputs_a.size() != cfg.n || cfg.inputs_b.size() != cfg.n)
    throw std::invalid_argument("view_distribution: input vectors must have length n");
  if (cfg.adversary >= cfg.n)
    throw std::invalid_argument("view_distribution: adversary out of range");
  if (cfg.inputs_a[cfg.adversary] != cfg.inputs_b[cfg.adversary])
    throw std::invalid_argument("view_distribution: adversary input must agree");
  if (remainder_sum(cfg.inputs_a, cfg.k) != remainder_sum(cfg.inputs_b, cfg.k))
    throw std::invalid_argument("view_distribution: predicate output must agree");
  if (cfg.trials < 100) throw std::invalid_argument("view_distribution: insufficient samples");
}

std::string plain_feature(const View<PlainRemainder>& v, std::size_t max_len) {
  std::string out;
  std::size_t len = std::min(max_len, v.observations.size());
  for (std::size_t i = 0; i < len; ++i) {
    const auto& o = v.observations[i];
    out += o.role == Role::Initiator ? 'I' : 'R';
    out += std::to_string(static_cast<int>(o.partner.value));
    out += o.partner.flag ? '+' : '-';
    out += ';';
  }
  return out;
}

// Clock and probe components are left out of the feature: they are shared
// plumbing with a large value range, which would dilute the histogram
// without adding anything an input could influence.
std::string masked_feature(const View<MaskedRemainder>& v, std::size_t max_len) {
  std::string out;
  std::size_t len = std::min(max_len, v.observations.size());
  for (std::size_t i = 0; i < len; ++i) {
    const auto& o = v.observations[i];
    out += o.role == Role::Initiator ? 'I' : 'R';
    out += std::to_string(static_cast<int>(o.partner.mask));
    out += label_name(o.partner.label);
    out += o.partner.leader ? 'L' : '.';
    out += std::to_string(static_cast<int>(o.partner.out));
    out += ';';
  }
  return out;
}

ViewDistResult assemble_view_dist(const ViewDistConfig& cfg, const char* protocol,
                                  std::vector<std::string> fa, std::vector<std::string> fb,
                                  std::uint64_t kept_a, std::uint64_t kept_b) {
  TvTestResult tv = tv_permutation_test(fa, fb, cfg.permutations, cfg.quantile_level,
                                        derive_stream(cfg.seed, "tv-null")(), cfg.threads);
  ViewDistResult res;
  res.report.protocol = protocol;
  res.report.attack = "view-distribution";
  res.report.n = cfg.n;
  res.report.k = cfg.k;
  res.report.trials = cfg.trials * 2;
  res.report.successes = kept_a + kept_b;
  res.report.tv_distance = tv.tv;
  res.report.threshold = tv.threshold;
  res.report.p_value = tv.p_value;
  res.report.verdict = tv.leaks ? "leaks" : "no-evidence";
  for (auto& f : fa) res.arm_a.add(f);
  for (auto& f : fb) res.arm_b.add(f);
  return res;
}

}  // namespace

std::pair<std::vector<int>, std::vector<int>> distinguisher_input_pair(std::uint32_t n, int k,
                                                                       std::uint32_t adversary,
                                                                       std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("distinguisher pair needs at least 3 agents");
  if (adversary >= n) throw std::invalid_argument("adversary out of range");
  Rng rng = derive_stream(seed, "distinguisher-inputs");
  int base = rng.zk(k);
  std::vector<int> a(n, base);
  a[adversary] = rng.zk(k);
  std::vector<int> b = a;
  std::uint32_t p = adversary == 0 ? 1 : 0;
  std::uint32_t q = p + 1 == adversary ? p + 2 : p + 1;
  b[p] = (base + 1) % k;
  b[q] = (base + k - 1) % k;
  return {a, b};
}

ViewDistResult view_distribution_plain(const ViewDistConfig& cfg) {
  check_view_dist_preconditions(cfg);
  PlainRemainder proto(cfg.k, 0, cfg.p_m1);
  std::vector<std::string> features[2];
  for (int arm = 0; arm < 2; ++arm) {
    const std::vector<int>& values = arm == 0 ? cfg.inputs_a : cfg.inputs_b;
    std::vector<std::string> out(cfg.trials);
    parallel_trials(cfg.trials, [&](std::uint64_t t) {
      std::uint64_t ts = trial_seed(detail::mix64(cfg.seed ^ (arm + 1)), t);
      RunOptions opt;
      opt.record_views = true;
      opt.views_only_agent = cfg.adversary;
      Population<PlainRemainder> pop(proto, values, ts, opt);
      const std::uint64_t cap = 512ull * cfg.n;
      while (pop.views()[cfg.adversary].observations.size() < cfg.feature_len &&
             pop.steps() < cap) {
        pop.step();
      }
      out[t] = plain_feature(pop.views()[cfg.adversary], cfg.feature_len);
    }, cfg.threads);
    features[arm] = std::move(out);
  }
  return assemble_view_dist(cfg, "plain", std::move(features[0]), std::move(features[1]),
                            cfg.trials, cfg.trials);
}

ViewDistResult view_distribution_masked(const ViewDistConfig& cfg) {
  check_view_dist_preconditions(cfg);
  MaskedRemainder proto(cfg.k, cfg.clock_phases);
  const std::uint32_t leader = (cfg.adversary + 1) % cfg.n;
  const std::uint64_t budget = masked_budget(cfg.n);
  std::vector<std::string> features[2];
  std::uint64_t kept_count[2] = {0, 0};
  for (int arm = 0; arm < 2; ++arm) {
    const std::vector<int>& values = arm == 0 ? cfg.inputs_a : cfg.inputs_b;
    const int expected = remainder_sum(values, cfg.k);
    std::vector<MaskedRemainder::Input> inputs(cfg.n);
    for (std::uint32_t a = 0; a < cfg.n; ++a) inputs[a] = {values[a], a == leader};
    std::vector<std::string> out(cfg.trials);
    std::vector<std::uint8_t> kept(cfg.trials, 0);
    parallel_trials(cfg.trials, [&](std::uint64_t t) {
      std::uint64_t ts = trial_seed(detail::mix64(cfg.seed ^ (arm + 1)), t);
      RunOptions opt;
      opt.record_views = true;
      opt.views_only_agent = cfg.adversary;
      opt.check_interval = cfg.n;
      Population<MaskedRemainder> pop(proto, inputs, ts, opt);
      auto done = [](const Population<MaskedRemainder>& p) {
        for (const auto& s : p.config())
          if (is_bot(s.msg.out)) return false;
        return true;
      };
      RunStatus status = pop.run(budget, done);
      if (!status.converged || pop.config()[0].msg.out != expected) return;
      kept[t] = 1;
      out[t] = masked_feature(pop.views()[cfg.adversary], cfg.feature_len);
    }, cfg.threads);
    std::vector<std::string> filtered;
    filtered.reserve(cfg.trials);
    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
      if (kept[t]) filtered.push_back(std::move(out[t]));
    }
    kept_count[arm] = filtered.size();
    features[arm] = std::move(filtered);
  }
  return assemble_view_dist(cfg, "masked", std::move(features[0]), std::move(features[1]),
                            kept_count[0], kept_count[1]);
}

}  // namespace popsim
