#include "boscids/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "boscids/detector.hpp"

namespace boscids {
namespace {

// Names an attacker-driven process tends to reach for; never part of a
// generated alphabet unless the caller asks for more names than the pool has.
const std::vector<std::string>& novel_pool() {
  static const std::vector<std::string> pool = {
      "ptrace",      "init_module", "finit_module", "kexec_load", "setns",
      "unshare",     "mount",       "umount2",      "pivot_root", "chroot",
      "bpf",         "keyctl",      "process_vm_writev", "perf_event_open"};
  return pool;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::vector<double> zipf_weights(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / std::pow(static_cast<double>(i + 1), s);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

std::size_t sample(Rng& rng, const std::vector<double>& cdf) {
  const double u = rng.uniform01();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
}

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  return cdf;
}

class MarkovWalk {
 public:
  MarkovWalk(const SourceSpec& spec, std::uint64_t seed) : rng_(seed) {
    cdfs_.reserve(spec.transition.size());
    for (const auto& row : spec.transition) cdfs_.push_back(cumulative(row));
    initial_ = cumulative(zipf_weights(spec.alphabet.size(), spec.zipf_s));
  }

  std::size_t start() { return sample(rng_, initial_); }
  std::size_t step(std::size_t from) { return sample(rng_, cdfs_[from]); }
  std::size_t step_permuted(std::size_t from, const std::vector<std::size_t>& perm) {
    return sample(rng_, cdfs_[perm[from]]);
  }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
  std::vector<std::vector<double>> cdfs_;
  std::vector<double> initial_;
};

std::vector<std::size_t> walk_states(const SourceSpec& spec, std::size_t total_calls) {
  std::vector<std::size_t> states;
  if (total_calls == 0) return states;
  states.reserve(total_calls);
  MarkovWalk walk(spec, spec.seed);
  std::size_t s = walk.start();
  states.push_back(s);
  while (states.size() < total_calls) {
    s = walk.step(s);
    states.push_back(s);
  }
  return states;
}

void shuffle(Rng& rng, std::vector<std::size_t>& v) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below(0)");
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

void SourceSpec::validate() const {
  if (alphabet.empty()) throw std::invalid_argument("source alphabet is empty");
  std::unordered_set<std::string> seen;
  for (const auto& name : alphabet) {
    if (!is_syscall_name(name)) throw std::invalid_argument("invalid syscall name '" + name + "'");
    if (!seen.insert(name).second) throw std::invalid_argument("duplicate alphabet name '" + name + "'");
  }
  if (transition.size() != alphabet.size()) throw std::invalid_argument("transition row count != alphabet size");
  for (std::size_t i = 0; i < transition.size(); ++i) {
    const auto& row = transition[i];
    if (row.size() != alphabet.size()) throw std::invalid_argument("transition row width != alphabet size");
    if (std::any_of(row.begin(), row.end(), [](double p) { return !(p >= 0.0); })) {
      throw std::invalid_argument("negative transition probability in row " + std::to_string(i));
    }
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("transition row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
  }
  if (!(zipf_s >= 0.0)) throw std::invalid_argument("zipf_s must be >= 0");
}

const std::vector<std::string>& syscall_name_pool() {
  static const std::vector<std::string> pool = {
      "read",         "write",        "futex",        "epoll_wait",   "recvfrom",
      "sendto",       "poll",         "lseek",        "pread64",      "pwrite64",
      "fsync",        "fdatasync",    "openat",       "close",        "fstat",
      "newfstatat",   "mmap",         "munmap",       "mprotect",     "brk",
      "madvise",      "clock_gettime","gettimeofday", "nanosleep",    "sched_yield",
      "getrusage",    "rt_sigprocmask","rt_sigaction","select",       "accept4",
      "setsockopt",   "getsockopt",   "getsockname",  "getpeername",  "shutdown",
      "io_submit",    "io_getevents", "fcntl",        "ioctl",        "dup2",
      "pipe2",        "getdents64",   "statfs",       "access",       "readlink",
      "unlink",       "rename",       "ftruncate",    "fallocate",    "mkdir",
      "rmdir",        "getpid",       "gettid",       "getuid",       "getgid",
      "geteuid",      "clone",        "set_robust_list","sigaltstack","prctl",
      "times",        "sysinfo",      "uname",        "getrandom",    "writev",
      "readv",        "sendmsg",      "recvmsg",      "socket",       "connect",
      "bind",         "listen",       "epoll_ctl",    "epoll_create1","eventfd2",
      "timerfd_settime","wait4",      "exit_group",   "execve",       "arch_prctl"};
  return pool;
}

SourceSpec make_source(const SourceShape& shape, std::uint64_t walk_seed) {
  if (shape.alphabet_size == 0) throw std::invalid_argument("alphabet_size must be positive");
  if (shape.branching == 0) throw std::invalid_argument("branching must be positive");
  if (!(shape.leak >= 0.0 && shape.leak < 1.0)) throw std::invalid_argument("leak must lie in [0, 1)");
  if (!(shape.decay > 0.0)) throw std::invalid_argument("decay must be positive");

  SourceSpec spec;
  spec.zipf_s = shape.zipf_s;
  spec.seed = walk_seed;
  const auto& pool = syscall_name_pool();
  for (std::size_t i = 0; i < shape.alphabet_size; ++i) {
    spec.alphabet.push_back(i < pool.size() ? pool[i] : "sys_" + std::to_string(i));
  }

  const std::size_t n = shape.alphabet_size;
  const auto target_cdf = cumulative(zipf_weights(n, shape.zipf_s));
  Rng rng(mix_seed(shape.structure_seed, 0x5eed));
  spec.transition.assign(n, std::vector<double>(n, shape.leak / static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = std::min(shape.branching, n);
    std::vector<std::size_t> successors;
    while (successors.size() < k) {
      const std::size_t t = sample(rng, target_cdf);
      if (std::find(successors.begin(), successors.end(), t) == successors.end()) successors.push_back(t);
    }
    double weight = 1.0, total = 0.0;
    std::vector<double> w(k);
    for (std::size_t j = 0; j < k; ++j, weight *= shape.decay) total += (w[j] = weight);
    for (std::size_t j = 0; j < k; ++j) spec.transition[i][successors[j]] += (1.0 - shape.leak) * w[j] / total;
    // Renormalize to absorb rounding drift.
    const double sum = std::accumulate(spec.transition[i].begin(), spec.transition[i].end(), 0.0);
    for (auto& p : spec.transition[i]) p /= sum;
  }
  return spec;
}

RawTrace gen_normal(const SourceSpec& spec, std::size_t total_calls) {
  spec.validate();
  if (total_calls == 0) throw std::invalid_argument("total_calls must be >= 1");
  RawTrace trace;
  for (std::size_t s : walk_states(spec, total_calls)) trace.push_back(spec.alphabet[s]);
  trace.source_meta = "synthetic seed=" + std::to_string(spec.seed) + " calls=" + std::to_string(total_calls);
  return trace;
}

std::string_view to_string(InjectionMode mode) {
  switch (mode) {
    case InjectionMode::novel_names: return "novel_names";
    case InjectionMode::shuffled_transitions: return "shuffled_transitions";
    case InjectionMode::burst_repeat: return "burst_repeat";
  }
  return "burst_repeat";
}

std::optional<InjectionMode> parse_injection_mode(std::string_view text) {
  if (text == "novel_names") return InjectionMode::novel_names;
  if (text == "shuffled_transitions") return InjectionMode::shuffled_transitions;
  if (text == "burst_repeat") return InjectionMode::burst_repeat;
  return std::nullopt;
}

LabeledTraceData gen_anomalous(const SourceSpec& spec, std::size_t total_calls,
                               const InjectionSpec& injection, const Config& config) {
  spec.validate();
  config.validate();
  if (total_calls == 0) throw std::invalid_argument("total_calls must be >= 1");
  if (!(injection.intensity > 0.0 && injection.intensity <= 1.0)) {
    throw std::invalid_argument("intensity must lie in (0, 1]");
  }
  const auto spans = epoch_partition(total_calls, config);
  for (auto e : injection.target_epochs) {
    if (e >= spans.size()) {
      throw std::invalid_argument("target epoch " + std::to_string(e) + " out of range (trace has " +
                                  std::to_string(spans.size()) + " epochs)");
    }
  }

  // Names as strings: injected names may fall outside the alphabet.
  const std::vector<std::size_t> states = walk_states(spec, total_calls);
  std::vector<std::string_view> names;
  names.reserve(total_calls);
  for (auto s : states) names.push_back(spec.alphabet[s]);

  std::vector<std::string> novel;
  for (const auto& n : novel_pool()) {
    if (std::find(spec.alphabet.begin(), spec.alphabet.end(), n) == spec.alphabet.end()) novel.push_back(n);
  }
  for (std::size_t i = 0; novel.size() < 4; ++i) {
    std::string candidate = "novel_syscall_" + std::to_string(i);
    if (std::find(spec.alphabet.begin(), spec.alphabet.end(), candidate) == spec.alphabet.end()) {
      novel.push_back(std::move(candidate));
    }
  }

  LabeledTraceData out;
  out.labels.assign(spans.size(), Label::normal);

  std::vector<std::size_t> targets = injection.target_epochs;
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (auto e : targets) {
    out.labels[e] = Label::malicious;
    const auto [first, len] = spans[e];
    Rng rng(mix_seed(spec.seed, 0x1000 + e));
    const auto replaced = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(injection.intensity * static_cast<double>(len))));

    if (injection.mode == InjectionMode::novel_names) {
      // Scattered positions: partial Fisher-Yates over the epoch.
      std::vector<std::size_t> pos(len);
      std::iota(pos.begin(), pos.end(), first);
      for (std::size_t i = 0; i < replaced; ++i) {
        std::swap(pos[i], pos[i + rng.below(len - i)]);
        names[pos[i]] = novel[rng.below(novel.size())];
      }
      continue;
    }

    const std::size_t start = first + rng.below(len - replaced + 1);
    if (injection.mode == InjectionMode::burst_repeat) {
      const std::size_t motif_len = 3 + rng.below(3);
      std::vector<std::size_t> motif(motif_len);
      for (auto& m : motif) m = rng.below(spec.alphabet.size());
      for (std::size_t i = 0; i < replaced; ++i) names[start + i] = spec.alphabet[motif[i % motif_len]];
    } else {
      std::vector<std::size_t> perm(spec.alphabet.size());
      std::iota(perm.begin(), perm.end(), 0);
      shuffle(rng, perm);
      std::size_t s = start > 0 ? states[start - 1] : 0;
      MarkovWalk permuted(spec, mix_seed(spec.seed, 0x2000 + e));
      for (std::size_t i = 0; i < replaced; ++i) {
        s = permuted.step_permuted(s, perm);
        names[start + i] = spec.alphabet[s];
      }
    }
  }

  for (auto n : names) out.trace.push_back(n);
  out.trace.source_meta = "synthetic seed=" + std::to_string(spec.seed) + " calls=" +
                          std::to_string(total_calls) + " injected=" + std::to_string(targets.size()) +
                          " mode=" + std::string(to_string(injection.mode));
  return out;
}

}  // namespace boscids
