#include "softmention/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "softmention/error.hpp"
#include "softmention/rng.hpp"

namespace softmention::retrieval {

namespace {

using nlohmann::json;

void sort_scored(std::vector<std::pair<Scored, std::string>>& scored) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first.similarity != b.first.similarity)
      return a.first.similarity > b.first.similarity;
    return a.second < b.second;
  });
}

}  // namespace

double cosine(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    raise(ErrorKind::Config, "cosine: dimension mismatch (" +
                                 std::to_string(a.size()) + " vs " +
                                 std::to_string(b.size()) + ")");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    raise(ErrorKind::Config, "cosine: zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    raise(ErrorKind::Data, "cannot open embeddings file " + path.string());
  EmbeddingStore store;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("key") ||
        !j.contains("values"))
      raise(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                 ": malformed embedding record");
    Vector v = j.at("values").get<Vector>();
    if (j.contains("dims") && j.at("dims").get<size_t>() != v.size())
      raise(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                 ": dims does not match values length");
    for (double x : v) {
      if (!std::isfinite(x))
        raise(ErrorKind::Data, path.string() + ":" + std::to_string(line_no) +
                                   ": non-finite embedding value");
    }
    store.put(j.at("key").get<std::string>(), std::move(v));
  }
  return store;
}

std::string EmbeddingStore::entity_key(const std::string& sentence_id,
                                       size_t idx) {
  return sentence_id + "#" + std::to_string(idx);
}

void EmbeddingStore::put(const std::string& key, Vector v) {
  vectors_[key] = std::move(v);
}

const Vector& EmbeddingStore::get(const std::string& key) const {
  auto it = vectors_.find(key);
  if (it == vectors_.end())
    raise(ErrorKind::Data, "no embedding for key '" + key + "'");
  return it->second;
}

const Vector* EmbeddingStore::find(const std::string& key) const {
  auto it = vectors_.find(key);
  return it == vectors_.end() ? nullptr : &it->second;
}

SentenceIndex build_sentence_index(const Corpus& pool,
                                   const EmbeddingStore& store) {
  SentenceIndex index;
  for (const AnnotatedSentence& s : pool) {
    const Vector& v = store.get(s.id);
    if (index.entries.empty()) index.dims = v.size();
    if (v.size() != index.dims)
      raise(ErrorKind::Data,
            "embedding for '" + s.id + "' has inconsistent dimensions");
    index.entries.push_back({s.id, v, &s});
  }
  return index;
}

std::vector<Scored> top_k_sentences(const SentenceIndex& index,
                                    const Vector& query, size_t k) {
  std::vector<std::pair<Scored, std::string>> scored;
  scored.reserve(index.entries.size());
  for (const auto& entry : index.entries) {
    scored.push_back(
        {{entry.sentence, cosine(query, entry.vec)}, entry.id});
  }
  sort_scored(scored);
  if (scored.size() > k) scored.resize(k);
  std::vector<Scored> out;
  out.reserve(scored.size());
  for (auto& [s, id] : scored) out.push_back(s);
  return out;
}

std::vector<EntityKey> build_entity_index(const Corpus& pool,
                                          const EmbeddingStore& store) {
  std::vector<EntityKey> index;
  for (const AnnotatedSentence& s : pool) {
    for (size_t i = 0; i < s.software.size(); ++i) {
      const Vector& v = store.get(EmbeddingStore::entity_key(s.id, i));
      index.push_back({s.software[i].surface, s.software[i].label, s.id, v, &s});
    }
  }
  return index;
}

std::vector<Scored> top_k_per_entity(const std::vector<EntityKey>& index,
                                     const std::vector<EntityKey>& candidates,
                                     size_t k_per_entity) {
  if (candidates.empty())
    raise(ErrorKind::Config, "no entity candidates");
  // best similarity per sentence id
  std::map<std::string, Scored> best;
  for (const EntityKey& candidate : candidates) {
    std::vector<std::pair<Scored, std::string>> scored;
    scored.reserve(index.size());
    for (const EntityKey& entry : index) {
      scored.push_back({{entry.sentence, cosine(candidate.vec, entry.vec)},
                        entry.sentence_id});
    }
    sort_scored(scored);
    if (scored.size() > k_per_entity) scored.resize(k_per_entity);
    for (auto& [s, id] : scored) {
      auto it = best.find(id);
      if (it == best.end() || s.similarity > it->second.similarity)
        best[id] = s;
    }
  }
  std::vector<std::pair<Scored, std::string>> merged;
  merged.reserve(best.size());
  for (auto& [id, s] : best) merged.push_back({s, id});
  sort_scored(merged);
  std::vector<Scored> out;
  out.reserve(merged.size());
  for (auto& [s, id] : merged) out.push_back(s);
  return out;
}

std::vector<const AnnotatedSentence*> random_coverage_examples(
    const Corpus& pool, RandomMode mode, size_t k, uint64_t rng_seed) {
  if (pool.empty()) raise(ErrorKind::Config, "empty example pool");
  std::vector<const AnnotatedSentence*> shuffled;
  shuffled.reserve(pool.size());
  for (const AnnotatedSentence& s : pool) shuffled.push_back(&s);
  Rng rng(rng_seed);
  rng.shuffle(shuffled);

  if (mode == RandomMode::FixedK) {
    if (shuffled.size() > k) shuffled.resize(k);
    return shuffled;
  }

  std::set<EntityLabel> uncovered(kAllEntityLabels.begin(),
                                  kAllEntityLabels.end());
  std::vector<const AnnotatedSentence*> picked;
  for (const AnnotatedSentence* s : shuffled) {
    bool adds = false;
    for (const Mention& m : s->software) {
      if (uncovered.count(std::get<EntityLabel>(m.label))) {
        adds = true;
        break;
      }
    }
    if (!adds) continue;
    picked.push_back(s);
    for (const Mention& m : s->software)
      uncovered.erase(std::get<EntityLabel>(m.label));
    if (uncovered.empty()) break;
  }
  if (!uncovered.empty()) {
    std::string missing;
    for (EntityLabel label : uncovered) {
      if (!missing.empty()) missing += ", ";
      missing += std::string(to_string(label));
    }
    raise(ErrorKind::Data,
          "pool cannot cover all entity labels; uncovered: " + missing);
  }
  return picked;
}

std::optional<Scored> retrieve_relation_example(const Signature& signature,
                                                const Corpus& train,
                                                const EmbeddingStore& store,
                                                const Vector& query) {
  std::optional<Scored> best;
  std::string best_id;
  for (const AnnotatedSentence& s : train) {
    bool has_signature = false;
    for (const Relation& r : s.relations) {
      Signature observed{s.mention(r.subject).label, r.relation,
                         s.mention(r.object).label};
      if (observed == signature) {
        has_signature = true;
        break;
      }
    }
    if (!has_signature) continue;
    double sim = cosine(query, store.get(s.id));
    if (!best || sim > best->similarity ||
        (sim == best->similarity && s.id < best_id)) {
      best = Scored{&s, sim};
      best_id = s.id;
    }
  }
  return best;
}

}  // namespace softmention::retrieval
