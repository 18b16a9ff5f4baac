#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "fewshot/synthetic.h"

namespace oracle {

std::vector<std::vector<int>> all_sequences(int n, int num_labels) {
  std::vector<std::vector<int>> out;
  std::vector<int> seq(static_cast<std::size_t>(n), 0);
  while (true) {
    out.push_back(seq);
    int i = n - 1;
    while (i >= 0 && seq[static_cast<std::size_t>(i)] == num_labels - 1) {
      seq[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
    ++seq[static_cast<std::size_t>(i)];
  }
  return out;
}

double path_score(const Eigen::MatrixXd& emission, const Eigen::MatrixXd& transition, double lambda,
                  const std::vector<int>& labels) {
  const int num_labels = static_cast<int>(emission.cols());
  double s = 0.0;
  int prev = num_labels;  // START
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s += transition(prev, labels[i]) + lambda * emission(static_cast<Eigen::Index>(i), labels[i]);
    prev = labels[i];
  }
  return s + transition(prev, num_labels + 1);
}

Exhaustive exhaustive_crf(const Eigen::MatrixXd& emission, const Eigen::MatrixXd& transition,
                          double lambda) {
  const int n = static_cast<int>(emission.rows());
  const int num_labels = static_cast<int>(emission.cols());
  const auto seqs = all_sequences(n, num_labels);
  std::vector<double> scores;
  scores.reserve(seqs.size());
  Exhaustive out;
  out.best_score = -std::numeric_limits<double>::infinity();
  for (const auto& s : seqs) {
    scores.push_back(path_score(emission, transition, lambda, s));
    if (scores.back() > out.best_score) {
      out.best_score = scores.back();
      out.best = s;
    }
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  long double z = 0.0L;
  for (double s : scores) z += std::exp(static_cast<long double>(s - m));
  out.log_z = m + static_cast<double>(std::log(z));
  out.node = Eigen::MatrixXd::Zero(n, num_labels);
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    const double p = std::exp(scores[k] - out.log_z);
    for (int i = 0; i < n; ++i) out.node(i, seqs[k][static_cast<std::size_t>(i)]) += p;
  }
  return out;
}

namespace {

char kind_of(const std::string& state) {
  if (state == "<START>") return 'S';
  if (state == "<END>") return 'E';
  if (state == "O") return 'O';
  return state[0];  // 'B' or 'I'
}

std::string slot_of(const std::string& state) { return state.size() > 2 ? state.substr(2) : ""; }

}  // namespace

std::string classify_cell(const std::string& prev, const std::string& next) {
  const char a = kind_of(prev);
  const char b = kind_of(next);
  if (b == 'S' || a == 'E') return "";
  if (a == 'S' && b == 'E') return "";
  std::string row;
  switch (a) {
    case 'S':
      row = "START";
      break;
    case 'O':
      row = "O";
      break;
    default:
      row = std::string(1, a);
  }
  std::string col;
  if (b == 'O') {
    col = "O";
  } else if (b == 'E') {
    col = "END";
  } else if (a == 'S' || a == 'O') {
    col = b == 'B' ? "sB" : "sI";
  } else {
    const bool same = slot_of(prev) == slot_of(next);
    col = std::string(same ? "s" : "d") + b;
  }
  return row + "->" + col;
}

std::vector<std::string> state_names(const fewshot::LabelSet& labels) {
  std::vector<std::string> names = labels.bio_labels();
  names.push_back("<START>");
  names.push_back("<END>");
  return names;
}

std::map<std::string, int> count(const std::vector<fewshot::Sentence>& sentences) {
  std::map<std::string, int> out;
  for (const auto& s : sentences) {
    for (const auto& l : s.labels) ++out[l];
  }
  return out;
}

bool covers(const std::vector<fewshot::Sentence>& support, const std::map<std::string, int>& domain_counts,
            int k) {
  const auto have = count(support);
  for (const auto& [label, n] : domain_counts) {
    if (n <= 0) continue;
    auto it = have.find(label);
    const int got = it == have.end() ? 0 : it->second;
    if (got < k) return false;
  }
  return true;
}

bool minimal(const std::vector<fewshot::Sentence>& support, const std::map<std::string, int>& domain_counts,
             int k) {
  for (std::size_t drop = 0; drop < support.size(); ++drop) {
    std::vector<fewshot::Sentence> rest;
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i != drop) rest.push_back(support[i]);
    }
    if (covers(rest, domain_counts, k)) return false;
  }
  return true;
}

std::vector<FixtureSentence> read_fixture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<FixtureSentence> out;
  FixtureSentence cur;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (!cur.gold.empty()) out.push_back(std::move(cur));
      cur = {};
      continue;
    }
    std::istringstream cols(line);
    std::string token, gold, pred;
    cols >> token >> gold >> pred;
    cur.gold.push_back(gold);
    cur.pred.push_back(pred);
  }
  if (!cur.gold.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<FixtureExpectation> read_expectations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<FixtureExpectation> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream cols(line);
    FixtureExpectation e;
    cols >> e.group >> e.first >> e.last >> e.precision >> e.recall >> e.f1;
    out.push_back(e);
  }
  return out;
}

std::string two_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

RandomCrf random_crf(int n, int num_labels, std::uint64_t seed, bool forbid_some) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RandomCrf out;
  out.emission.resize(n, num_labels);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < num_labels; ++j) out.emission(i, j) = normal(gen);
    // log-softmax rows so the emission looks like the real thing
    const double m = out.emission.row(i).maxCoeff();
    const double z = m + std::log((out.emission.row(i).array() - m).exp().sum());
    out.emission.row(i).array() -= z;
  }
  const int states = num_labels + 2;
  out.transition = Eigen::MatrixXd::Constant(states, states, -1e30);
  for (int p = 0; p < states; ++p) {
    for (int q = 0; q < states; ++q) {
      const bool structural = q != num_labels && p != num_labels + 1 && !(p == num_labels && q == num_labels + 1);
      if (!structural) continue;
      if (forbid_some && q < num_labels && unit(gen) < 0.15) continue;
      out.transition(p, q) = normal(gen);
    }
  }
  // keep at least label 0 reachable everywhere so Z is finite
  for (int p = 0; p < states; ++p) {
    if (p != num_labels + 1) out.transition(p, 0) = normal(gen);
  }
  out.transition(0, num_labels + 1) = normal(gen);
  out.lambda = 0.5 + unit(gen);
  return out;
}

fewshot::EpisodeSet synthetic_episodes(int domains, int episodes_per_domain, int k, int queries,
                                       std::uint64_t seed) {
  fewshot::SyntheticSpec spec;
  spec.slots = 3;
  spec.sentences = 60;
  spec.inner_words = 2;
  const auto doms = fewshot::synthetic_domains(domains, spec, seed);
  fewshot::SplitOptions options;
  options.episodes_per_domain = episodes_per_domain;
  options.k = k;
  options.n_query = queries;
  options.seed = seed + 1;
  return fewshot::build_split(doms, options);
}

fewshot::EmbeddingStore noisy_store(const fewshot::EpisodeSet& set, int dim, std::uint64_t seed,
                                    double noise) {
  using fewshot::Role;
  fewshot::EmbeddingStore store(dim);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  auto put = [&](const fewshot::TokenKey& key, const std::string& token) {
    const Eigen::VectorXd base = fewshot::hash_embed(token, dim, seed);
    std::vector<float> v(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) v[static_cast<std::size_t>(d)] = static_cast<float>(base[d] + noise * normal(gen));
    store.put(key, std::move(v));
  };
  for (const auto& ep : set.episodes) {
    for (const auto& key : fewshot::required_token_keys({{ep}, set.k, set.queries_per_episode, set.rng_seed}, true)) {
      const auto& sentence = key.role == Role::kQuery ? ep.queries[static_cast<std::size_t>(key.sentence_index)]
                                                      : ep.support.sentences[static_cast<std::size_t>(key.sentence_index)];
      put(key, sentence.tokens[static_cast<std::size_t>(key.token_index)]);
    }
    for (const auto& label : ep.label_set.bio_labels()) {
      const Eigen::VectorXd v = fewshot::hash_embed_text(fewshot::label_text(label), dim, seed);
      std::vector<float> f(v.data(), v.data() + v.size());
      store.put(fewshot::LabelKey{ep.domain_name, label}, std::move(f));
    }
  }
  return store;
}

}  // namespace oracle
