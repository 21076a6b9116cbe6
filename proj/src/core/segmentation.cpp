#include "cogniprof/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "cogniprof/error.hpp"

namespace cogniprof::segmentation {

TermFeatures term_profiles(std::span<const corpus::CleanPost> posts,
                           const lessn::LexiconSet& lexicons) {
  std::unordered_map<Term, std::map<std::string, double>> sums;
  std::unordered_map<Term, double> containing;
  std::unordered_set<Term> seen;
  for (const auto& post : posts) {
    const corpus::CleanPost* one[] = {&post};
    const auto counts = lexicons.empty() ? lessn::FeatureCounts{} : lessn::count_features(one, lexicons);
    seen.clear();
    for (const auto& t : post.tokens) {
      if (!seen.insert(t).second) continue;
      containing[t] += 1;
      auto& acc = sums[t];
      for (const auto& [name, c] : counts.counts) {
        if (c != 0) acc[name] += c;
      }
      if (counts.senti_positive_sum != 0) acc[std::string(lessn::kSentiPositive)] += counts.senti_positive_sum;
      if (counts.senti_negative_sum != 0) acc[std::string(lessn::kSentiNegative)] += counts.senti_negative_sum;
    }
  }
  TermFeatures out;
  for (auto& [term, acc] : sums) {
    lessn::LinguisticFeatureVector lv;
    const double n = containing[term];
    for (const auto& [name, c] : acc) lv.entries[name] = c / n;
    out.emplace(term, std::move(lv));
  }
  return out;
}

std::size_t TermGraph::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 1469598103934665603ULL ^ k.n;
  for (std::size_t i = 0; i < k.n; ++i) {
    h ^= k.ids[i];
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

bool TermGraph::make_key(std::span<const Term> terms, Key& key) const {
  if (terms.empty() || terms.size() > kMaxPhraseLength) return false;
  key = Key{};
  key.n = static_cast<std::uint8_t>(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto it = ids_.find(terms[i]);
    if (it == ids_.end()) return false;
    key.ids[i] = it->second;
  }
  return true;
}

double TermGraph::weight(const Term& t) const {
  const auto it = ids_.find(t);
  if (it == ids_.end()) fail(ErrorCode::lookup, "term not in graph: '" + t + "'");
  return weights_[it->second];
}

std::size_t TermGraph::frequency(const Term& t) const {
  const auto it = ids_.find(t);
  if (it == ids_.end()) fail(ErrorCode::lookup, "term not in graph: '" + t + "'");
  return postings_[it->second].size();
}

double TermGraph::cosine(std::uint32_t a, std::uint32_t b) const {
  if (a == b) return norms_[a] > 0 ? 1.0 : 0.0;
  if (norms_[a] == 0 || norms_[b] == 0) return 0.0;
  const auto& pa = profiles_[a];
  const auto& pb = profiles_[b];
  if (pa == pb) return 1.0;
  double dot = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) dot += pa[i] * pb[i];
  return std::clamp(dot / (norms_[a] * norms_[b]), 0.0, 1.0);
}

bool TermGraph::share_post(std::uint32_t a, std::uint32_t b) const {
  const auto& pa = postings_[a];
  const auto& pb = postings_[b];
  std::size_t i = 0, j = 0;
  while (i < pa.size() && j < pb.size()) {
    if (pa[i] == pb[j]) return true;
    if (pa[i] < pb[j]) ++i;
    else ++j;
  }
  return false;
}

double TermGraph::coherence(const Term& x, const Term& y) const {
  const auto ix = ids_.find(x);
  const auto iy = ids_.find(y);
  if (ix == ids_.end()) fail(ErrorCode::lookup, "term not in graph: '" + x + "'");
  if (iy == ids_.end()) fail(ErrorCode::lookup, "term not in graph: '" + y + "'");
  if (ix->second != iy->second && !share_post(ix->second, iy->second)) return 0.0;
  return cosine(ix->second, iy->second);
}

std::size_t TermGraph::count(std::span<const Term> terms) const {
  Key key;
  if (!make_key(terms, key)) return 0;
  const auto it = ngrams_.find(key);
  return it == ngrams_.end() ? 0 : it->second.count;
}

double TermGraph::probability(std::span<const Term> terms) const {
  if (terms.empty() || terms.size() > max_n_) return 0.0;
  const auto total = windows_[terms.size()];
  if (total == 0) return 0.0;
  return static_cast<double>(count(terms)) / static_cast<double>(total);
}

std::size_t TermGraph::authors_using(std::span<const Term> terms) const {
  Key key;
  if (!make_key(terms, key)) return 0;
  const auto it = ngrams_.find(key);
  return it == ngrams_.end() ? 0 : it->second.authors;
}

std::vector<Edge> TermGraph::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& ids : post_terms_) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        pairs.emplace_back(std::min(ids[i], ids[j]), std::max(ids[i], ids[j]));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<Edge> out;
  out.reserve(pairs.size());
  for (const auto& [a, b] : pairs) out.push_back(Edge{terms_[a], terms_[b], cosine(a, b)});
  return out;
}

TermGraph build_term_graph(std::span<const corpus::CleanPost> posts, const TermFeatures& features,
                           double epsilon, std::size_t max_n) {
  if (posts.empty()) fail(ErrorCode::validation, "cannot build a term graph from an empty corpus");
  if (!(epsilon > 0)) fail(ErrorCode::argument, "epsilon must be positive");
  if (max_n < 2 || max_n > kMaxPhraseLength) {
    fail(ErrorCode::argument, "max n must be between 2 and " + std::to_string(kMaxPhraseLength));
  }
  TermGraph g;
  g.epsilon_ = epsilon;
  g.max_n_ = max_n;
  g.post_count_ = posts.size();

  std::vector<std::size_t> order(posts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return posts[a].author_id < posts[b].author_id;
  });

  g.post_terms_.resize(posts.size());
  std::vector<std::uint32_t> ids;
  std::uint32_t author = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto p = order[k];
    if (k > 0 && posts[p].author_id != posts[order[k - 1]].author_id) ++author;
    const auto& tokens = posts[p].tokens;
    ids.clear();
    for (const auto& t : tokens) {
      auto [it, inserted] = g.ids_.emplace(t, static_cast<std::uint32_t>(g.terms_.size()));
      if (inserted) {
        g.terms_.push_back(t);
        g.postings_.emplace_back();
      }
      ids.push_back(it->second);
      auto& posting = g.postings_[it->second];
      if (posting.empty() || posting.back() != p) posting.push_back(static_cast<std::uint32_t>(p));
    }
    auto& unique_ids = g.post_terms_[p];
    unique_ids = ids;
    std::sort(unique_ids.begin(), unique_ids.end());
    unique_ids.erase(std::unique(unique_ids.begin(), unique_ids.end()), unique_ids.end());

    for (std::size_t n = 1; n <= max_n; ++n) {
      if (ids.size() < n) break;
      g.windows_[n] += ids.size() - n + 1;
      for (std::size_t i = 0; i + n <= ids.size(); ++i) {
        TermGraph::Key key;
        key.n = static_cast<std::uint8_t>(n);
        std::copy_n(ids.begin() + static_cast<std::ptrdiff_t>(i), n, key.ids.begin());
        auto& s = g.ngrams_[key];
        ++s.count;
        if (s.last_author != author) {
          s.last_author = author;
          ++s.authors;
        }
      }
    }
  }
  g.author_count_ = posts.empty() ? 0 : author + 1;
  for (auto& posting : g.postings_) std::sort(posting.begin(), posting.end());

  std::vector<std::string> names;
  for (const auto& [_, lv] : features) {
    for (const auto& [name, w] : lv.entries) names.push_back(name);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());

  const auto n_terms = g.terms_.size();
  g.profiles_.assign(n_terms, std::vector<double>(names.size(), 0.0));
  g.norms_.assign(n_terms, 0.0);
  g.weights_.assign(n_terms, 0.0);
  double max_l1 = 0;
  for (std::size_t i = 0; i < n_terms; ++i) {
    const auto it = features.find(g.terms_[i]);
    if (it == features.end()) continue;
    auto& prof = g.profiles_[i];
    double l1 = 0, sq = 0;
    for (std::size_t f = 0; f < names.size(); ++f) {
      prof[f] = it->second.weight(names[f]);
      l1 += std::abs(prof[f]);
      sq += prof[f] * prof[f];
    }
    g.norms_[i] = std::sqrt(sq);
    g.weights_[i] = l1;
    max_l1 = std::max(max_l1, l1);
  }
  if (max_l1 > 0) {
    for (auto& w : g.weights_) w /= max_l1;
  }
  return g;
}

double edge_score(const Term& x, const Term& y, const TermGraph& g) {
  const double c = g.coherence(x, y);
  return std::max(g.epsilon(), 0.5 * (g.weight(x) + g.weight(y)) * c);
}

std::string Phrase::text(char sep) const {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) out.push_back(sep);
    out += terms[i];
  }
  return out;
}

double scp_score(std::span<const Term> terms, const TermGraph& g) {
  const auto n = terms.size();
  if (n < 2) fail(ErrorCode::argument, "a phrase needs at least two terms");
  if (n > g.max_n()) return kNoScore;
  for (const auto& t : terms) {
    if (!g.contains(t)) return kNoScore;
  }
  const double p = g.probability(terms);
  if (p <= 0) return kNoScore;
  double s = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) s = std::max(s, edge_score(terms[i], terms[i + 1], g));
  double denom = 0;
  for (std::size_t k = 1; k < n; ++k) {
    const double left = g.probability(terms.subspan(0, k));
    const double right = g.probability(terms.subspan(k));
    if (left <= 0 || right <= 0) return kNoScore;
    denom += left * right;
  }
  denom /= static_cast<double>(n - 1);
  return std::log(s * p * p / denom);
}

double scp_score(const Phrase& phrase, const TermGraph& g) { return scp_score(phrase.terms, g); }

std::vector<Phrase> extract_segments(std::span<const corpus::CleanPost> posts, const TermGraph& g,
                                     std::size_t top_k, double popularity_cap, std::size_t max_n) {
  if (top_k == 0) return {};
  max_n = std::min(max_n, g.max_n());
  std::unordered_set<TermGraph::Key, TermGraph::KeyHash> seen;
  std::vector<Phrase> out;
  const double authors = static_cast<double>(std::max<std::size_t>(g.author_count(), 1));
  for (const auto& post : posts) {
    const auto& tokens = post.tokens;
    for (std::size_t n = 2; n <= max_n && n <= tokens.size(); ++n) {
      for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::span<const Term> window(tokens.data() + i, n);
        TermGraph::Key key;
        if (!g.make_key(window, key)) continue;
        if (!seen.insert(key).second) continue;
        if (static_cast<double>(g.authors_using(window)) / authors > popularity_cap) continue;
        const double scp = scp_score(window, g);
        if (scp == kNoScore) continue;
        out.push_back(Phrase{std::vector<Term>(window.begin(), window.end()), g.probability(window), scp});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Phrase& a, const Phrase& b) {
    if (a.scp != b.scp) return a.scp > b.scp;
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.terms < b.terms;
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

void write_segments(std::ostream& out, std::span<const Phrase> phrases) {
  out << "phrase\tn\tprobability\tscp\n";
  const auto old = out.precision(17);
  for (const auto& p : phrases) {
    out << p.text() << '\t' << p.terms.size() << '\t' << p.probability << '\t' << p.scp << '\n';
  }
  out.precision(old);
}

}  // namespace cogniprof::segmentation
