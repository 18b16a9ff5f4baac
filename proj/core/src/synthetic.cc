#include "fewshot/synthetic.h"

#include "fewshot/error.h"
#include "fewshot/rng.h"

namespace fewshot {
namespace {

int draw_between(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

}  // namespace

std::string synthetic_slot_name(const std::string& domain, int slot) {
  return domain + "_slot" + std::to_string(slot);
}

Domain synthetic_domain(const std::string& name, const SyntheticSpec& spec, std::uint64_t seed) {
  if (spec.slots < 1 || spec.sentences < 1 || spec.filler_words < 1 || spec.inner_words < 1 ||
      spec.min_spans < 1 || spec.max_spans < spec.min_spans || spec.max_inner < 0 ||
      spec.max_gap < 1) {
    throw ConfigError("invalid synthetic domain spec");
  }
  Rng rng(seed);
  std::vector<Sentence> sentences;
  sentences.reserve(static_cast<std::size_t>(spec.sentences));
  for (int s = 0; s < spec.sentences; ++s) {
    Sentence out;
    auto emit = [&](std::string token, std::string label) {
      out.tokens.push_back(std::move(token));
      out.labels.push_back(std::move(label));
    };
    auto filler = [&](int count) {
      for (int i = 0; i < count; ++i) {
        emit(name + "_w" + std::to_string(uniform_index(rng, static_cast<std::size_t>(spec.filler_words))),
             "O");
      }
    };
    // Cycle the first span's slot so every slot is frequent.
    const int spans = draw_between(rng, spec.min_spans, spec.max_spans);
    filler(draw_between(rng, 0, spec.max_gap));
    for (int k = 0; k < spans; ++k) {
      const int slot = k == 0 ? s % spec.slots
                              : static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spec.slots)));
      const std::string slot_name = synthetic_slot_name(name, slot);
      emit(name + "_b" + std::to_string(slot), "B-" + slot_name);
      const int inner = spec.max_inner > 0 ? draw_between(rng, 1, spec.max_inner) : 0;
      for (int i = 0; i < inner; ++i) {
        emit(name + "_i" + std::to_string(uniform_index(rng, static_cast<std::size_t>(spec.inner_words))),
             "I-" + slot_name);
      }
      filler(draw_between(rng, 1, spec.max_gap));
    }
    sentences.push_back(std::move(out));
  }
  return make_domain(name, std::move(sentences));
}

std::vector<Domain> synthetic_domains(int count, const SyntheticSpec& spec, std::uint64_t seed) {
  std::vector<Domain> out;
  for (int d = 0; d < count; ++d) {
    out.push_back(synthetic_domain("d" + std::to_string(d), spec,
                                   derive_seed(seed, 0x73796e7468ULL, static_cast<std::uint64_t>(d))));
  }
  return out;
}

}  // namespace fewshot
