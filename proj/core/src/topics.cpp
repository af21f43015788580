#include "semshort/topics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace semshort {

namespace {

std::vector<std::string> tokens_of(const ItemCorpus& corpus, const std::vector<int>& member_ids) {
  std::vector<std::string> doc;
  for (int id : member_ids) {
    const auto& item = corpus.items.at(static_cast<std::size_t>(id - 1));
    doc.insert(doc.end(), item.tokens.begin(), item.tokens.end());
  }
  return doc;
}

void sort_and_number(TopicModel& model) {
  std::stable_sort(model.topics.begin(), model.topics.end(), [](const Topic& a, const Topic& b) {
    if (a.member_ids.size() != b.member_ids.size()) return a.member_ids.size() > b.member_ids.size();
    return a.member_ids.front() < b.member_ids.front();
  });
  for (std::size_t i = 0; i < model.topics.size(); ++i) model.topics[i].topic_id = static_cast<int>(i);
}

void refresh_weights(TopicModel& model, const ItemCorpus& corpus, Warnings* warnings) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(model.topics.size());
  for (const auto& t : model.topics) docs.push_back(tokens_of(corpus, t.member_ids));
  auto weights = ctfidf(docs, warnings);
  for (std::size_t i = 0; i < model.topics.size(); ++i) {
    model.topics[i].ctfidf = std::move(weights[i]);
    model.topics[i].keywords = top_keywords(model.topics[i].ctfidf, model.top_n_words);
  }
}

}  // namespace

std::vector<int> TopicModel::selected_ids() const {
  std::vector<int> ids;
  for (const auto& t : topics)
    for (const auto& r : t.representatives) ids.push_back(r.item_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TermVector> ctfidf(const std::vector<std::vector<std::string>>& class_tokens, Warnings* warnings) {
  std::vector<TermVector> counts(class_tokens.size());
  TermVector totals;
  double token_total = 0.0;
  for (std::size_t c = 0; c < class_tokens.size(); ++c) {
    for (const auto& t : class_tokens[c]) {
      counts[c][t] += 1.0;
      totals[t] += 1.0;
    }
    token_total += static_cast<double>(class_tokens[c].size());
    if (class_tokens[c].empty() && warnings) {
      warnings->push_back(fmt::format("topics: class {} has no tokens; its c-TF-IDF vector is zero", c));
    }
  }
  if (class_tokens.empty()) return counts;
  const double avg = token_total / static_cast<double>(class_tokens.size());
  for (auto& row : counts)
    for (auto& [term, w] : row) w *= std::log(1.0 + avg / totals.find(term)->second);
  return counts;
}

std::vector<TermVector> ctfidf(const ItemCorpus& corpus, const ClusterAssignment& assignment, Warnings* warnings) {
  std::vector<std::vector<std::string>> docs(assignment.n_clusters());
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    const int label = assignment.labels[i];
    if (label < 0) continue;
    const auto& tokens = corpus.items.at(i).tokens;
    docs[static_cast<std::size_t>(label)].insert(docs[static_cast<std::size_t>(label)].end(), tokens.begin(), tokens.end());
  }
  return ctfidf(docs, warnings);
}

std::vector<TermWeight> top_keywords(const TermVector& weights, std::size_t n) {
  std::vector<TermWeight> all;
  all.reserve(weights.size());
  for (const auto& [term, w] : weights) all.push_back({term, w});
  // Map order is lexicographic, so a stable sort on weight keeps the tie rule.
  std::stable_sort(all.begin(), all.end(), [](const TermWeight& a, const TermWeight& b) { return a.weight > b.weight; });
  if (all.size() > n) all.resize(n);
  return all;
}

double cosine_similarity(const TermVector& a, const TermVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [t, w] : a) {
    na += w * w;
    if (auto it = b.find(t); it != b.end()) dot += w * it->second;
  }
  for (const auto& [t, w] : b) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

TopicModel build_topics(const ItemCorpus& corpus, const ClusterAssignment& assignment, std::size_t top_n_words,
                        Warnings* warnings) {
  if (assignment.labels.size() != corpus.size()) {
    throw Error(ErrorCode::invalid_input, "cluster assignment does not match corpus size");
  }
  TopicModel model;
  model.top_n_words = top_n_words;
  model.topics.resize(assignment.n_clusters());
  for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
    const int label = assignment.labels[i];
    const int id = corpus.items[i].id;
    if (label < 0) {
      model.outliers.push_back(id);
    } else {
      model.topics[static_cast<std::size_t>(label)].member_ids.push_back(id);
    }
  }
  std::erase_if(model.topics, [](const Topic& t) { return t.member_ids.empty(); });
  if (model.topics.empty()) return model;
  sort_and_number(model);
  refresh_weights(model, corpus, warnings);
  return model;
}

TopicModel merge_topics(TopicModel model, const ItemCorpus& corpus, const MergeMode& mode, Warnings* warnings) {
  if (mode.target) {
    if (*mode.target < 1) throw Error(ErrorCode::invalid_config, "nr_topics must be >= 1", "config.nr_topics");
    if (*mode.target > model.topics.size()) {
      if (warnings) {
        warnings->push_back(fmt::format("topics: target {} exceeds the {} discovered topics; nothing merged",
                                        *mode.target, model.topics.size()));
      }
      return model;
    }
  }
  while (model.topics.size() >= 2) {
    if (mode.target && model.topics.size() <= *mode.target) break;
    std::size_t best_i = 0, best_j = 1;
    double best = -2.0;
    for (std::size_t i = 0; i < model.topics.size(); ++i)
      for (std::size_t j = i + 1; j < model.topics.size(); ++j) {
        const double c = cosine_similarity(model.topics[i].ctfidf, model.topics[j].ctfidf);
        if (c > best) {
          best = c;
          best_i = i;
          best_j = j;
        }
      }
    if (!mode.target && best < mode.threshold) break;

    auto& into = model.topics[best_i];
    const auto& from = model.topics[best_j];
    model.merge_log.push_back({from.topic_id, into.topic_id, best});
    into.member_ids.insert(into.member_ids.end(), from.member_ids.begin(), from.member_ids.end());
    std::sort(into.member_ids.begin(), into.member_ids.end());
    model.topics.erase(model.topics.begin() + static_cast<long>(best_j));
    sort_and_number(model);
    refresh_weights(model, corpus, warnings);
  }
  return model;
}

std::vector<std::size_t> allocate_budget(const std::vector<std::size_t>& sizes, std::size_t budget) {
  if (budget < sizes.size()) {
    throw Error(ErrorCode::invalid_config,
                fmt::format("budget {} is smaller than the number of topics ({})", budget, sizes.size()),
                "config.budget");
  }
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  budget = std::min(budget, total);
  std::vector<std::size_t> alloc(sizes.size(), 0);
  if (sizes.empty()) return alloc;

  std::vector<double> remainder(sizes.size());
  std::size_t used = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double quota = static_cast<double>(budget) * static_cast<double>(sizes[i]) / static_cast<double>(total);
    alloc[i] = std::min(sizes[i], std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(quota))));
    remainder[i] = quota - std::floor(quota);
    used += alloc[i];
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Hand out what is left by remainder; take back from the smallest remainders if the floor-of-1 overshot.
  while (used < budget) {
    bool gave = false;
    for (std::size_t i : order) {
      if (used == budget) break;
      if (alloc[i] < sizes[i]) {
        ++alloc[i];
        ++used;
        gave = true;
      }
    }
    if (!gave) break;
  }
  while (used > budget) {
    bool took = false;
    for (auto it = order.rbegin(); it != order.rend() && used > budget; ++it) {
      if (alloc[*it] > 1) {
        --alloc[*it];
        --used;
        took = true;
      }
    }
    if (!took) break;
  }
  return alloc;
}

TopicModel select_representatives(TopicModel model, const ClusterAssignment& assignment,
                                   const SelectionOptions& options, Warnings* warnings) {
  if (options.min_prob < 0.0 || options.min_prob > 1.0) {
    throw Error(ErrorCode::invalid_config, "min_prob must lie in [0, 1]", "config.min_prob");
  }
  if (options.k_per_topic < 1 && !options.budget) {
    throw Error(ErrorCode::invalid_config, "k_per_topic must be >= 1", "config.k_per_topic");
  }
  std::vector<std::size_t> quota(model.topics.size(), options.k_per_topic);
  if (options.budget) {
    std::vector<std::size_t> sizes;
    for (const auto& t : model.topics) sizes.push_back(t.member_ids.size());
    quota = allocate_budget(sizes, *options.budget);
  }
  for (std::size_t t = 0; t < model.topics.size(); ++t) {
    auto& topic = model.topics[t];
    std::vector<Representative> ranked;
    for (int id : topic.member_ids) {
      const double p = assignment.probabilities.at(static_cast<std::size_t>(id - 1));
      ranked.push_back({id, p, p < options.min_prob});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Representative& a, const Representative& b) {
      if (a.probability != b.probability) return a.probability > b.probability;
      return a.item_id < b.item_id;
    });
    if (quota[t] > ranked.size() && warnings) {
      warnings->push_back(fmt::format("topics: topic {} has only {} items; selecting all of them", topic.topic_id,
                                      ranked.size()));
    }
    ranked.resize(std::min(quota[t], ranked.size()));
    topic.representatives = std::move(ranked);
  }
  return model;
}

}  // namespace semshort
