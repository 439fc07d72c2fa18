#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace rgbt {

// Deterministic random stream. All sampling in the project goes through this
// wrapper so that results depend only on the seed, not on library internals
// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), engine_(seed) {}

  uint64_t seed() const { return seed_; }
  uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds, rejection sampling keeps it unbiased
  int64_t uniform_int(int64_t lo, int64_t hi);

  // standard normal, Box-Muller with a cached spare
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  bool coin() { return uniform() < 0.5; }

  // independent child stream; mixing is stable across runs
  Rng derive(uint64_t tag) const;

 private:
  uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 finalizer, used to fold tags into seeds
uint64_t mix_seed(uint64_t a, uint64_t b);

// Runs fn(i) for i in [0, n). jobs <= 1 executes inline. Work items must be
// independent; iteration-to-thread assignment never affects results because
// each index writes only its own slot.
void parallel_for(int64_t n, int jobs, const std::function<void(int64_t)>& fn);

// --- small text utilities --------------------------------------------------

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// fixed-precision formatting so CSV bytes are reproducible
std::string format_fixed(double value, int decimals);

// joins row cells with commas; caller guarantees cells contain no commas
std::string csv_row(const std::vector<std::string>& cells);

}  // namespace rgbt
