#pragma once

/**
 * Model parameters: embedding tables, three LSTMs (path encoder, context
 * encoder, decoder), projection matrices, and the learned EOS/start vectors.
 *
 * All tensors are double-precision Eigen matrices (vectors stored as n x 1)
 * so that generic traversal via visit() covers initialization, optimizer
 * state, serialization, and gradient checking with one mechanism.
 *
 * Checkpoints are line-oriented text; every double is written as the hex of
 * its bit pattern, so save -> load -> save is byte-identical.
 */

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "treedit/model/vocab.hpp"

namespace treedit::model {

struct ModelConfig {
  int embed_dim = 64;    // d: node/value embedding width
  int hidden_dim = 128;  // h: LSTM and projection width
  bool use_context = true;
  double dropout = 0.25;
  int max_decode_len = 16;

  bool operator==(const ModelConfig&) const = default;
};

/// One LSTM's weights; input width varies (gates stacked as [i; f; g; o]).
struct LstmParams {
  Eigen::MatrixXd w_ih;  // 4h x in
  Eigen::MatrixXd w_hh;  // 4h x h
  Eigen::MatrixXd b;     // 4h x 1
};

struct ModelParams {
  ModelConfig cfg;
  Vocab vocab;

  Eigen::MatrixXd e_kinds;      // |kinds| x d, one row per node kind
  Eigen::MatrixXd e_index;      // (max_child_index+1) x d
  Eigen::MatrixXd e_subtokens;  // |subtokens| x d

  LstmParams path_lstm;  // d -> h, over a path's node sequence
  LstmParams ctx_lstm;   // h -> h, over context path encodings
  LstmParams dec_lstm;   // h -> h, the operation decoder

  Eigen::MatrixXd w_path;   // h x (h + 2d): combines LSTM tail + endpoints
  Eigen::MatrixXd w_mov;    // h x h per-kind candidate projections
  Eigen::MatrixXd w_upd;    // h x h
  Eigen::MatrixXd w_ins;    // h x h
  Eigen::MatrixXd w_attn;   // h x h attention bilinear form
  Eigen::MatrixXd w_point;  // h x h pointer bilinear form

  Eigen::MatrixXd eos_class;  // h x 1, the learned end-of-script class
  Eigen::MatrixXd dec_start;  // h x 1, first decoder input

  /// Allocates all tensors for the given vocabulary and fills them with
  /// seeded uniform noise: embeddings and the two learned vectors from
  /// U(-0.05, 0.05), weight matrices from U(-s, s) with s = 1/sqrt(fan_in),
  /// biases zero. Draw order is the visit() order, so identical seeds give
  /// bitwise-identical parameters.
  static ModelParams init(const ModelConfig& cfg, const Vocab& vocab, uint64_t seed);

  /// Same shapes as *this, all zeros (gradient / optimizer-state buffers).
  ModelParams zeros_like() const;

  size_t param_count() const;

  /// Calls f(name, tensor) for every tensor in a fixed order.
  template <typename F>
  void visit(F&& f) {
    f("e_kinds", e_kinds);
    f("e_index", e_index);
    f("e_subtokens", e_subtokens);
    f("path_lstm.w_ih", path_lstm.w_ih);
    f("path_lstm.w_hh", path_lstm.w_hh);
    f("path_lstm.b", path_lstm.b);
    f("ctx_lstm.w_ih", ctx_lstm.w_ih);
    f("ctx_lstm.w_hh", ctx_lstm.w_hh);
    f("ctx_lstm.b", ctx_lstm.b);
    f("dec_lstm.w_ih", dec_lstm.w_ih);
    f("dec_lstm.w_hh", dec_lstm.w_hh);
    f("dec_lstm.b", dec_lstm.b);
    f("w_path", w_path);
    f("w_mov", w_mov);
    f("w_upd", w_upd);
    f("w_ins", w_ins);
    f("w_attn", w_attn);
    f("w_point", w_point);
    f("eos_class", eos_class);
    f("dec_start", dec_start);
  }

  template <typename F>
  void visit(F&& f) const {
    const_cast<ModelParams*>(this)->visit(
        [&](const char* name, Eigen::MatrixXd& t) { f(name, static_cast<const Eigen::MatrixXd&>(t)); });
  }
};

/// Writes config, vocabulary, and all tensors as versioned text.
void save_checkpoint(const ModelParams& params, std::ostream& out);
void save_checkpoint_file(const ModelParams& params, const std::string& path);

/// Throws DataError on version/shape/format mismatch.
ModelParams load_checkpoint(std::istream& in);
ModelParams load_checkpoint_file(const std::string& path);

}  // namespace treedit::model
