#pragma once

// A small differentiable begin/end scorer.
//
// Each token position gets a context vector
//   h_i = [e; l; r; q; e*q; l*q; r*q; o(x_i); o(l); o(r)]
// where e = e(x_i) is a learned embedding, l and r the mean embeddings
// of the up to `window` tokens left and right of i, q the mean question
// embedding and * the elementwise product. o(x_i) is 1 when x_i occurs
// in the question, o(l) and o(r) the fraction of left and right window
// tokens that do (known tokens only). Scores are linear heads:
//   s_b(i) = w_b . h_i,  s_e(i) = w_e . h_i,
// and the NULL slot of a paragraph scores its mean context vector:
//   s_b(NULL) = u_b . mean_i h_i + bias_b   (likewise for the end).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsqa/corpus.hpp"
#include "dsqa/errors.hpp"
#include "dsqa/prob_space.hpp"

namespace dsqa {

class Vocabulary {
 public:
  static constexpr int kUnknown = 0;

  Vocabulary() : words_{"<unk>"} { index_.emplace(words_.front(), kUnknown); }

  // Sorted unique tokens of every question and paragraph, after <unk>.
  static Vocabulary build(std::span<const DocumentQuestionPair> pairs) {
    std::vector<std::string> words;
    for (const auto& p : pairs) {
      for (const auto& t : p.question) words.push_back(t.text);
      for (const auto& para : p.paragraphs)
        for (const auto& t : para.tokens) words.push_back(t.text);
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    Vocabulary v;
    for (auto& w : words) v.add(w);
    return v;
  }

  int add(const std::string& word) {
    auto [it, inserted] = index_.emplace(word, static_cast<int>(words_.size()));
    if (inserted) words_.push_back(word);
    return it->second;
  }
  int id(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnknown : it->second;
  }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

struct EncodedPair {
  std::vector<int> question;
  std::vector<std::vector<int>> paragraphs;
};

inline EncodedPair encode(const Vocabulary& vocab, const DocumentQuestionPair& pair) {
  EncodedPair e;
  for (const auto& t : pair.question) e.question.push_back(vocab.id(t.text));
  for (const auto& p : pair.paragraphs) {
    auto& ids = e.paragraphs.emplace_back();
    for (const auto& t : p.tokens) ids.push_back(vocab.id(t.text));
  }
  return e;
}

class ToyScorer {
 public:
  static constexpr int kBlocks = 7;
  static constexpr int kOverlapFeatures = 3;

  ToyScorer() = default;
  ToyScorer(Vocabulary vocab, int dim, int window = 2)
      : vocab_(std::move(vocab)), dim_(dim), window_(window), params_(layout_size(vocab_.size(), dim), 0.0) {
    if (dim < 1) throw DomainError("embedding dimension must be >= 1");
    if (window < 0) throw DomainError("context window must be >= 0");
  }

  const Vocabulary& vocab() const noexcept { return vocab_; }
  int dim() const noexcept { return dim_; }
  int window() const noexcept { return window_; }
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(kBlocks * dim_ + kOverlapFeatures); }

  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  // Parameter layout offsets.
  std::size_t embedding_offset(int token) const { return static_cast<std::size_t>(token) * static_cast<std::size_t>(dim_); }
  std::size_t w_begin_offset() const { return vocab_.size() * static_cast<std::size_t>(dim_); }
  std::size_t w_end_offset() const { return w_begin_offset() + feature_dim(); }
  std::size_t u_begin_offset() const { return w_end_offset() + feature_dim(); }
  std::size_t u_end_offset() const { return u_begin_offset() + feature_dim(); }
  std::size_t bias_begin_offset() const { return u_end_offset() + feature_dim(); }
  std::size_t bias_end_offset() const { return bias_begin_offset() + 1; }

  // Gaussian embeddings, zero heads. Scores start uniform.
  void initialize(std::uint64_t seed, double embedding_scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, embedding_scale);
    std::fill(params_.begin(), params_.end(), 0.0);
    for (std::size_t x = 0; x < w_begin_offset(); ++x) params_[x] = normal(rng);
  }

  // Appends tokens unseen by this vocabulary, with fresh random rows.
  void extend_vocabulary(std::span<const DocumentQuestionPair> pairs, std::uint64_t seed, double embedding_scale) {
    auto extra = Vocabulary::build(pairs);
    std::vector<std::string> fresh;
    for (const auto& w : extra.words())
      if (vocab_.id(w) == Vocabulary::kUnknown && w != "<unk>") fresh.push_back(w);
    if (fresh.empty()) return;
    const std::size_t old_rows = vocab_.size();
    std::vector<double> heads(params_.begin() + static_cast<std::ptrdiff_t>(w_begin_offset()), params_.end());
    std::vector<double> emb(params_.begin(), params_.begin() + static_cast<std::ptrdiff_t>(w_begin_offset()));
    for (const auto& w : fresh) vocab_.add(w);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, embedding_scale);
    emb.resize(vocab_.size() * static_cast<std::size_t>(dim_));
    for (std::size_t x = old_rows * static_cast<std::size_t>(dim_); x < emb.size(); ++x) emb[x] = normal(rng);
    params_ = std::move(emb);
    params_.insert(params_.end(), heads.begin(), heads.end());
  }

  static std::size_t layout_size(std::size_t vocab_size, int dim) {
    const auto d = static_cast<std::size_t>(dim);
    return vocab_size * d + 4 * (kBlocks * d + kOverlapFeatures) + 2;
  }

 private:
  Vocabulary vocab_;
  int dim_ = 0;
  int window_ = 2;
  std::vector<double> params_;
};

// Intermediate values kept for the backward pass.
struct ScorerCache {
  std::vector<double> q;
  std::vector<std::vector<double>> h;     // per paragraph, n * feature_dim
  std::vector<std::vector<double>> hbar;  // per paragraph, feature_dim
};

namespace detail {

struct Window {
  std::size_t left_lo, right_hi;  // [left_lo, i) and (i, right_hi]
};

inline Window window_at(std::size_t i, std::size_t n, int win) {
  const auto w = static_cast<std::size_t>(win);
  return {i >= w ? i - w : 0, std::min(n - 1, i + w)};
}

}  // namespace detail

inline ScoreGrid forward(const ToyScorer& scorer, const EncodedPair& enc, ScorerCache* cache = nullptr) {
  const auto d = static_cast<std::size_t>(scorer.dim());
  const std::size_t f = scorer.feature_dim();
  const auto& w = scorer.params();
  auto emb = [&](int tok) { return w.data() + scorer.embedding_offset(tok); };

  std::vector<double> q(d, 0.0);
  for (int t : enc.question) {
    const double* e = emb(t);
    for (std::size_t a = 0; a < d; ++a) q[a] += e[a];
  }
  if (!enc.question.empty())
    for (auto& v : q) v /= static_cast<double>(enc.question.size());

  ScoreGrid grid;
  ScorerCache local;
  ScorerCache& c = cache ? *cache : local;
  c.q = q;
  c.h.assign(enc.paragraphs.size(), {});
  c.hbar.assign(enc.paragraphs.size(), {});

  const double* wb = w.data() + scorer.w_begin_offset();
  const double* we = w.data() + scorer.w_end_offset();
  const double* ub = w.data() + scorer.u_begin_offset();
  const double* ue = w.data() + scorer.u_end_offset();
  auto in_question = [&](int tok) {
    return tok != Vocabulary::kUnknown && std::find(enc.question.begin(), enc.question.end(), tok) != enc.question.end();
  };

  for (std::size_t k = 0; k < enc.paragraphs.size(); ++k) {
    const auto& ids = enc.paragraphs[k];
    const std::size_t n = ids.size();
    std::vector<double> overlap(n);
    for (std::size_t i = 0; i < n; ++i) overlap[i] = in_question(ids[i]) ? 1.0 : 0.0;
    auto& H = c.h[k];
    H.assign(n * f, 0.0);
    auto& hbar = c.hbar[k];
    hbar.assign(f, 0.0);
    ParagraphScores ps(n);
    for (std::size_t i = 0; i < n; ++i) {
      double* h = H.data() + i * f;
      const double* e = emb(ids[i]);
      const auto win = detail::window_at(i, n, scorer.window());
      for (std::size_t j = win.left_lo; j < i; ++j) {
        const double* ej = emb(ids[j]);
        for (std::size_t a = 0; a < d; ++a) h[d + a] += ej[a];
        h[7 * d + 1] += overlap[j];
      }
      for (std::size_t j = i + 1; j <= win.right_hi; ++j) {
        const double* ej = emb(ids[j]);
        for (std::size_t a = 0; a < d; ++a) h[2 * d + a] += ej[a];
        h[7 * d + 2] += overlap[j];
      }
      const std::size_t nl = i - win.left_lo, nr = win.right_hi - i;
      if (nl > 0) {
        for (std::size_t a = 0; a < d; ++a) h[d + a] /= static_cast<double>(nl);
        h[7 * d + 1] /= static_cast<double>(nl);
      }
      if (nr > 0) {
        for (std::size_t a = 0; a < d; ++a) h[2 * d + a] /= static_cast<double>(nr);
        h[7 * d + 2] /= static_cast<double>(nr);
      }
      h[7 * d] = overlap[i];
      for (std::size_t a = 0; a < d; ++a) {
        h[a] = e[a];
        h[3 * d + a] = q[a];
        h[4 * d + a] = e[a] * q[a];
        h[5 * d + a] = h[d + a] * q[a];
        h[6 * d + a] = h[2 * d + a] * q[a];
      }
      double sb = 0.0, se = 0.0;
      for (std::size_t a = 0; a < f; ++a) {
        sb += wb[a] * h[a];
        se += we[a] * h[a];
        hbar[a] += h[a];
      }
      ps.begin[i] = sb;
      ps.end[i] = se;
    }
    if (n > 0)
      for (auto& v : hbar) v /= static_cast<double>(n);
    double nb = w[scorer.bias_begin_offset()], ne = w[scorer.bias_end_offset()];
    for (std::size_t a = 0; a < f; ++a) {
      nb += ub[a] * hbar[a];
      ne += ue[a] * hbar[a];
    }
    ps.begin[n] = nb;
    ps.end[n] = ne;
    grid.paragraphs.push_back(std::move(ps));
  }
  return grid;
}

inline ScoreGrid score(const ToyScorer& scorer, const DocumentQuestionPair& pair) {
  return forward(scorer, encode(scorer.vocab(), pair));
}

// Accumulates scale * d(objective)/d(params) into `grad`, given
// d(objective)/d(score) for every grid entry.
inline void backward(const ToyScorer& scorer, const EncodedPair& enc, const ScorerCache& cache,
                     const ScoreGrid& score_grad, std::vector<double>& grad, double scale = 1.0) {
  const auto d = static_cast<std::size_t>(scorer.dim());
  const std::size_t f = scorer.feature_dim();
  const auto& w = scorer.params();
  if (grad.size() != w.size()) grad.assign(w.size(), 0.0);

  const double* wb = w.data() + scorer.w_begin_offset();
  const double* we = w.data() + scorer.w_end_offset();
  const double* ub = w.data() + scorer.u_begin_offset();
  const double* ue = w.data() + scorer.u_end_offset();
  double* gwb = grad.data() + scorer.w_begin_offset();
  double* gwe = grad.data() + scorer.w_end_offset();
  double* gub = grad.data() + scorer.u_begin_offset();
  double* gue = grad.data() + scorer.u_end_offset();
  const auto& q = cache.q;

  std::vector<double> dq(d, 0.0), dh(f), dl(d), dr(d);
  for (std::size_t k = 0; k < enc.paragraphs.size(); ++k) {
    const auto& ids = enc.paragraphs[k];
    const std::size_t n = ids.size();
    const auto& gs = score_grad.paragraphs[k];
    const double gnb = scale * gs.begin[n];
    const double gne = scale * gs.end[n];
    const auto& H = cache.h[k];
    const auto& hbar = cache.hbar[k];

    grad[scorer.bias_begin_offset()] += gnb;
    grad[scorer.bias_end_offset()] += gne;
    for (std::size_t a = 0; a < f; ++a) {
      gub[a] += gnb * hbar[a];
      gue[a] += gne * hbar[a];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double gb = scale * gs.begin[i];
      const double ge = scale * gs.end[i];
      const double* h = H.data() + i * f;
      for (std::size_t a = 0; a < f; ++a) {
        gwb[a] += gb * h[a];
        gwe[a] += ge * h[a];
        dh[a] = gb * wb[a] + ge * we[a] + (gnb * ub[a] + gne * ue[a]) / static_cast<double>(n);
      }
      double* ge_row = grad.data() + scorer.embedding_offset(ids[i]);
      for (std::size_t a = 0; a < d; ++a) {
        ge_row[a] += dh[a] + dh[4 * d + a] * q[a];
        dq[a] += dh[3 * d + a] + dh[4 * d + a] * h[a] + dh[5 * d + a] * h[d + a] + dh[6 * d + a] * h[2 * d + a];
        dl[a] = dh[d + a] + dh[5 * d + a] * q[a];
        dr[a] = dh[2 * d + a] + dh[6 * d + a] * q[a];
      }
      const auto win = detail::window_at(i, n, scorer.window());
      const std::size_t nl = i - win.left_lo, nr = win.right_hi - i;
      for (std::size_t j = win.left_lo; j < i; ++j) {
        double* gj = grad.data() + scorer.embedding_offset(ids[j]);
        for (std::size_t a = 0; a < d; ++a) gj[a] += dl[a] / static_cast<double>(nl);
      }
      for (std::size_t j = i + 1; j <= win.right_hi; ++j) {
        double* gj = grad.data() + scorer.embedding_offset(ids[j]);
        for (std::size_t a = 0; a < d; ++a) gj[a] += dr[a] / static_cast<double>(nr);
      }
    }
  }
  if (!enc.question.empty()) {
    const double inv = 1.0 / static_cast<double>(enc.question.size());
    for (int t : enc.question) {
      double* gq = grad.data() + scorer.embedding_offset(t);
      for (std::size_t a = 0; a < d; ++a) gq[a] += dq[a] * inv;
    }
  }
}

}  // namespace dsqa
