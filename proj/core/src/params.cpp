#include "treedit/model/params.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace treedit::model {

namespace {

constexpr const char* kMagic = "treedit-model";
constexpr int kVersion = 1;

bool is_embedding_tensor(const std::string& name) {
  return name.rfind("e_", 0) == 0 || name == "eos_class" || name == "dec_start";
}

bool is_bias_tensor(const std::string& name) {
  return name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0;
}

uint64_t double_bits(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  return bits;
}

double bits_double(uint64_t bits) {
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

std::string hex_of(double v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << double_bits(v);
  return os.str();
}

double parse_hex_double(const std::string& word) {
  uint64_t bits = 0;
  const char* end = word.data() + word.size();
  auto [ptr, ec] = std::from_chars(word.data(), end, bits, 16);
  if (word.size() != 16 || ec != std::errc() || ptr != end) {
    throw DataError("checkpoint: bad value '" + word + "'");
  }
  return bits_double(bits);
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError(std::string("checkpoint: unexpected end of file, expected ") + what);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, const Vocab& vocab, uint64_t seed) {
  const int d = cfg.embed_dim;
  const int h = cfg.hidden_dim;

  ModelParams p;
  p.cfg = cfg;
  p.vocab = vocab;
  p.e_kinds.setZero(static_cast<int>(vocab.kinds.size()), d);
  p.e_index.setZero(vocab.max_child_index + 1, d);
  p.e_subtokens.setZero(static_cast<int>(vocab.subtokens.size()), d);
  auto lstm = [&](LstmParams& l, int in) {
    l.w_ih.setZero(4 * h, in);
    l.w_hh.setZero(4 * h, h);
    l.b.setZero(4 * h, 1);
  };
  lstm(p.path_lstm, d);
  lstm(p.ctx_lstm, h);
  lstm(p.dec_lstm, h);
  p.w_path.setZero(h, h + 2 * d);
  p.w_mov.setZero(h, h);
  p.w_upd.setZero(h, h);
  p.w_ins.setZero(h, h);
  p.w_attn.setZero(h, h);
  p.w_point.setZero(h, h);
  p.eos_class.setZero(h, 1);
  p.dec_start.setZero(h, 1);

  std::mt19937_64 rng(seed);
  p.visit([&](const char* name, Eigen::MatrixXd& t) {
    std::string n(name);
    if (is_bias_tensor(n)) return;  // biases stay zero
    double scale = is_embedding_tensor(n) ? 0.05 : 1.0 / std::sqrt(static_cast<double>(t.cols()));
    std::uniform_real_distribution<double> dist(-scale, scale);
    // Row-major fill so the draw order is independent of Eigen's layout.
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = dist(rng);
    }
  });
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  z.visit([](const char*, Eigen::MatrixXd& t) { t.setZero(); });
  return z;
}

size_t ModelParams::param_count() const {
  size_t n = 0;
  visit([&](const char*, const Eigen::MatrixXd& t) { n += static_cast<size_t>(t.size()); });
  return n;
}

void save_checkpoint(const ModelParams& params, std::ostream& out) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "embed_dim " << params.cfg.embed_dim << '\n';
  out << "hidden_dim " << params.cfg.hidden_dim << '\n';
  out << "use_context " << (params.cfg.use_context ? 1 : 0) << '\n';
  out << "dropout " << hex_of(params.cfg.dropout) << '\n';
  out << "max_decode_len " << params.cfg.max_decode_len << '\n';
  out << "max_child_index " << params.vocab.max_child_index << '\n';
  out << "kinds " << params.vocab.kinds.size() << '\n';
  for (const auto& k : params.vocab.kinds) out << k << '\n';
  out << "subtokens " << params.vocab.subtokens.size() << '\n';
  for (const auto& s : params.vocab.subtokens) out << s << '\n';
  params.visit([&](const char* name, const Eigen::MatrixXd& t) {
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        if (c) out << ' ';
        out << hex_of(t(r, c));
      }
      out << '\n';
    }
  });
  out << "end\n";
}

void save_checkpoint_file(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open checkpoint file for writing: " + path);
  save_checkpoint(params, out);
  if (!out) throw DataError("failed writing checkpoint file: " + path);
}

namespace {

long expect_keyed_int(std::istream& in, const std::string& key) {
  std::istringstream ls(next_line(in, key.c_str()));
  std::string word;
  long value = 0;
  if (!(ls >> word >> value) || word != key) {
    throw DataError("checkpoint: expected '" + key + " <n>'");
  }
  return value;
}

}  // namespace

ModelParams load_checkpoint(std::istream& in) {
  {
    std::istringstream ls(next_line(in, "header"));
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kMagic) {
      throw DataError("checkpoint: bad header (not a model checkpoint)");
    }
    if (version != kVersion) {
      throw DataError("checkpoint: unsupported version " + std::to_string(version));
    }
  }

  ModelConfig cfg;
  cfg.embed_dim = static_cast<int>(expect_keyed_int(in, "embed_dim"));
  cfg.hidden_dim = static_cast<int>(expect_keyed_int(in, "hidden_dim"));
  cfg.use_context = expect_keyed_int(in, "use_context") != 0;
  {
    std::istringstream ls(next_line(in, "dropout"));
    std::string word, hex;
    if (!(ls >> word >> hex) || word != "dropout") throw DataError("checkpoint: expected dropout");
    cfg.dropout = parse_hex_double(hex);
  }
  cfg.max_decode_len = static_cast<int>(expect_keyed_int(in, "max_decode_len"));

  Vocab vocab;
  vocab.max_child_index = static_cast<int>(expect_keyed_int(in, "max_child_index"));
  long n_kinds = expect_keyed_int(in, "kinds");
  for (long i = 0; i < n_kinds; ++i) vocab.kinds.push_back(next_line(in, "kind"));
  long n_subtokens = expect_keyed_int(in, "subtokens");
  for (long i = 0; i < n_subtokens; ++i) vocab.subtokens.push_back(next_line(in, "subtoken"));
  for (size_t i = 0; i < vocab.kinds.size(); ++i) {
    vocab.kind_ids[vocab.kinds[i]] = static_cast<int>(i);
  }
  for (size_t i = 0; i < vocab.subtokens.size(); ++i) {
    vocab.subtoken_ids[vocab.subtokens[i]] = static_cast<int>(i);
  }

  ModelParams params = ModelParams::init(cfg, vocab, /*seed=*/0);
  params.visit([&](const char* name, Eigen::MatrixXd& t) {
    std::istringstream ls(next_line(in, "tensor header"));
    std::string word, got_name;
    long rows = 0, cols = 0;
    if (!(ls >> word >> got_name >> rows >> cols) || word != "tensor") {
      throw DataError("checkpoint: expected tensor header");
    }
    if (got_name != name) {
      throw DataError("checkpoint: expected tensor '" + std::string(name) + "', found '" +
                      got_name + "'");
    }
    if (rows != t.rows() || cols != t.cols()) {
      throw DataError("checkpoint: tensor '" + got_name + "' has shape " + std::to_string(rows) +
                      "x" + std::to_string(cols) + ", expected " + std::to_string(t.rows()) + "x" +
                      std::to_string(t.cols()));
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      std::istringstream row(next_line(in, "tensor row"));
      std::string hex;
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(row >> hex)) throw DataError("checkpoint: short tensor row");
        t(r, c) = parse_hex_double(hex);
      }
      if (row >> hex) throw DataError("checkpoint: trailing values in tensor row");
    }
  });
  if (next_line(in, "end marker") != "end") throw DataError("checkpoint: missing end marker");
  return params;
}

ModelParams load_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint file: " + path);
  return load_checkpoint(in);
}

}  // namespace treedit::model
