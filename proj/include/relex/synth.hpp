#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relex/corpus_types.hpp"
#include "relex/rng.hpp"

namespace relex {

// Deterministic template-based corpus over five relation types plus None
// (roughly 60/40 valid/None). Templates carry fixed head rules, include
// distractor clauses and long-range variants with entities well over ten
// tokens apart, and every emitted instance is validated before it leaves
// the generator.
Instance generate_instance(Rng& rng);

std::vector<std::string> generate_corpus_lines(std::uint64_t seed, int count);

// continues the same stream: instance index range [from, from+count)
std::vector<std::string> generate_corpus_slice(std::uint64_t seed, int from, int count);

std::string instance_to_jsonl(const Instance& inst);

}  // namespace relex
