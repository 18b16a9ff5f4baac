#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fewshot/corpus.h"

namespace fewshot {

// Generator for toy slot-filling domains with a private vocabulary.
//
// Every token is prefixed with the domain name, so two domains never share
// a word. Each slot owns one begin word; inner words come from a pool that
// all slots of the domain share, which makes I-x locally ambiguous and
// only resolvable through the preceding B-x.
struct SyntheticSpec {
  int slots = 5;
  int sentences = 200;
  int filler_words = 4;   // O vocabulary
  int inner_words = 1;    // shared I vocabulary
  int min_spans = 1;
  int max_spans = 3;
  int max_inner = 3;      // I tokens per span, drawn from [1, max_inner]
  int max_gap = 2;        // O tokens between spans, drawn from [1, max_gap]
};

std::string synthetic_slot_name(const std::string& domain, int slot);

Domain synthetic_domain(const std::string& name, const SyntheticSpec& spec, std::uint64_t seed);

// Domains named d0, d1, ... with independent sub-seeds.
std::vector<Domain> synthetic_domains(int count, const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace fewshot
