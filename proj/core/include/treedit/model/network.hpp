#pragma once

/**
 * Forward and backward passes of the operation-pointer network.
 *
 * A prepared example carries feature ids only (no tree pointers), so the
 * network layer is independent of how examples were produced.
 *
 * Shapes follow one convention: vectors are columns, and a set of vectors
 * is a matrix with one column per element. With d = embed_dim and
 * h = hidden_dim:
 *
 *   encode_node(n)   = E_index[child_index] + E_kinds[kind]        (d)
 *   encode_value(v)  = sum of subtoken embeddings                  (d)
 *   encode_path(p)   = tanh(W_path * [lstm_tail; end_src; end_tgt])(h)
 *       where the path LSTM reads encode_node of every path node and the
 *       endpoint slots use encode_value for terminals, encode_node else.
 *   Z_paths          = encode_path over the unique candidate paths (h x np)
 *   Z_ctx            = context-LSTM hidden states over the context
 *                      path encodings, in script order             (h x nc)
 *   Z_classes        = per-kind projection W_MOV/W_UPD/W_INS of each
 *                      candidate's path encoding, then the learned
 *                      EOS class appended                          (h x m+1)
 *   decoder          = LSTM from h0 = mean of all columns of Z_paths and
 *                      Z_ctx (zero if both empty), inputs dec_start then
 *                      the previous gold/predicted class vector
 *   attention        = softmax(Z_ctx' W_attn h_t) over context columns,
 *                      output c_t = weighted sum (c_t := h_t when there
 *                      is no context)
 *   pointer          = softmax(Z_classes' W_point c_t)             (m+1)
 *
 * Loss is the mean negative log-likelihood of the gold class sequence
 * followed by EOS, under teacher forcing. All math is double precision;
 * the path encoder batches every path of an example into per-timestep
 * GEMMs (paths sorted by length, longest first).
 */

#include <Eigen/Dense>
#include <random>
#include <utility>
#include <vector>

#include "treedit/model/params.hpp"
#include "treedit/path_ops.hpp"

namespace treedit::model {

struct PathEndpoint {
  bool is_value = false;          // terminal endpoints encode their value
  int kind_id = 0;                // used when !is_value
  int index_id = 0;               // used when !is_value
  std::vector<int> subtoken_ids;  // used when is_value
};

/// Feature ids for one tree path.
struct PathSpec {
  std::vector<int> kind_ids;   // per path node, source first
  std::vector<int> index_ids;  // per path node (clamped child index)
  PathEndpoint source, target;
};

PathSpec make_path_spec(const Vocab& vocab, const ast::Ast& tree,
                        const ast::AstPath& path);

struct CandidateRef {
  int path = 0;  // index into PreparedExample::paths
  paths::PathOpKind kind = paths::PathOpKind::Mov;
};

/// One example, reduced to feature ids. Class j < candidates.size() is
/// candidates[j]; class candidates.size() is EOS.
struct PreparedExample {
  std::vector<PathSpec> paths;           // unique candidate paths
  std::vector<CandidateRef> candidates;  // class order
  std::vector<PathSpec> context;         // context ops, script order
  std::vector<int> gold;                 // gold class indices, EOS excluded
};

/// Dedupes candidate paths, resolves gold ops to class indices (throws
/// CoverageError when a gold op is not in the candidate set), and encodes
/// the context ops in order.
PreparedExample prepare_example(const Vocab& vocab,
                                const paths::AugmentedAst& aug_target,
                                const paths::CandidateSet& candidates,
                                const std::vector<paths::PathOperation>& gold,
                                const paths::AugmentedAst& aug_context,
                                const std::vector<paths::PathOperation>& context);

// ====== building blocks (forward only) ======

Eigen::VectorXd encode_node(const ModelParams& p, int kind_id, int index_id);
Eigen::VectorXd encode_value(const ModelParams& p, const std::vector<int>& subtoken_ids);

/// Column j encodes specs[j].
Eigen::MatrixXd encode_paths(const ModelParams& p, const std::vector<PathSpec>& specs);

/// Context-LSTM states, one column per context path.
Eigen::MatrixXd encode_context(const ModelParams& p, const std::vector<PathSpec>& specs);

Eigen::MatrixXd encode_candidates(const ModelParams& p, const Eigen::MatrixXd& z_paths,
                                  const std::vector<CandidateRef>& candidates);

/// Returns {attention weights over context columns, their weighted sum}.
std::pair<Eigen::VectorXd, Eigen::VectorXd> attend(const ModelParams& p,
                                                   const Eigen::MatrixXd& z_ctx,
                                                   const Eigen::VectorXd& h);

/// Pointer distribution over the classes (sums to 1).
Eigen::VectorXd point(const ModelParams& p, const Eigen::MatrixXd& z_classes,
                      const Eigen::VectorXd& ctx);

// ====== loss, gradients, decoding ======

struct ForwardTrace {
  std::vector<Eigen::VectorXd> class_probs;        // pointer dist per step
  std::vector<Eigen::VectorXd> attention_weights;  // empty when no context
};

/// Teacher-forced mean NLL of gold ++ [EOS]. With `grads`, accumulates
/// d loss / d params (same shapes, see ModelParams::zeros_like). With
/// `dropout_rng`, applies inverted dropout to the context path encodings
/// entering the context LSTM (column by column) and then to each decoder
/// input, in that draw order.
double forward_loss(const ModelParams& p, const PreparedExample& ex,
                    ModelParams* grads = nullptr,
                    std::mt19937_64* dropout_rng = nullptr,
                    ForwardTrace* trace = nullptr);

/// Greedy decode: argmax class per step until EOS or cfg.max_decode_len.
std::vector<int> predict_greedy(const ModelParams& p, const PreparedExample& ex);

/// Max relative error |analytic - numeric| / max(1e-4, |a| + |n|) over
/// `coords` seeded random parameter coordinates, with central differences
/// of width `epsilon` (dropout off). The denominator floor keeps finite-
/// difference noise on near-zero gradients from drowning the signal.
double grad_check(const ModelParams& p, const PreparedExample& ex, double epsilon,
                  int coords, uint64_t seed);

}  // namespace treedit::model
