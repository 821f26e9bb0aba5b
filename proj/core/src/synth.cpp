#include "treedit/synth.hpp"

#include <filesystem>
#include <fstream>
#include <cstdio>
#include <random>

#include "treedit/errors.hpp"

namespace treedit::synth {

namespace {

std::vector<std::string> pick_distinct(std::mt19937_64& rng,
                                       const std::vector<std::string>& pool, size_t k) {
  if (pool.size() < k) {
    throw DataError("identifier pool too small: need " + std::to_string(k) + ", have " +
                    std::to_string(pool.size()));
  }
  std::vector<size_t> idx(pool.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::vector<std::string> out;
  for (size_t j = 0; j < k; ++j) {
    std::uniform_int_distribution<size_t> pick(j, idx.size() - 1);
    std::swap(idx[j], idx[pick(rng)]);
    out.push_back(pool[idx[j]]);
  }
  return out;
}

data::ChangedSpan line_span(int line) { return {line, line, line, line}; }

SynthCase mov_arg_case(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  auto id = pick_distinct(rng, pool, 9);
  const std::string &c = id[0], &f = id[1], &a1 = id[2], &a2 = id[3], &t = id[4], &g = id[5],
                    &b1 = id[6], &b2 = id[7], &b3 = id[8];
  SynthCase sc;
  sc.before_text = c + " = " + f + "(" + a1 + ", " + a2 + ");\n" +  //
                   t + " = " + g + "(" + b1 + ", " + b2 + ", " + b3 + ");\n";
  sc.after_text = c + " = " + f + "(" + a2 + ", " + a1 + ");\n" +  //
                  t + " = " + g + "(" + b3 + ", " + b1 + ", " + b2 + ");\n";
  sc.span = line_span(2);
  return sc;
}

SynthCase del_wrap_case(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  auto id = pick_distinct(rng, pool, 8);
  const std::string &c = id[0], &h = id[1], &w = id[2], &x = id[3], &t = id[4], &u = id[5],
                    &v = id[6], &y = id[7];
  SynthCase sc;
  sc.before_text = c + " = " + h + "(" + w + "(" + x + "));\n" +  //
                   t + " = " + u + "(" + v + "(" + y + "));\n";
  sc.after_text = c + " = " + h + "(" + x + ");\n" +  //
                  t + " = " + u + "(" + y + ");\n";
  sc.span = line_span(2);
  return sc;
}

SynthCase upd_rename_case(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  auto id = pick_distinct(rng, pool, 10);
  const std::string &oldname = id[0], &newname = id[1], &l = id[2], &s = id[3], &p = id[4],
                    &q = id[5], &m1 = id[6], &m2 = id[7], &r = id[8], &fn = id[9];
  SynthCase sc;
  sc.before_text = oldname + " = " + l + "(" + s + ");\n" +          //
                   p + " = " + q + "(" + m1 + ", " + m2 + ");\n" +   //
                   r + " = " + oldname + "." + fn + "();\n";
  sc.after_text = newname + " = " + l + "(" + s + ");\n" +           //
                  p + " = " + q + "(" + m2 + ", " + m1 + ");\n" +    //
                  r + " = " + newname + "." + fn + "();\n";
  sc.span = line_span(3);
  return sc;
}

SynthCase ins_subtree_case(std::mt19937_64& rng, const std::vector<std::string>& pool) {
  auto id = pick_distinct(rng, pool, 5);
  const std::string &c = id[0], &a = id[1], &t = id[2], &x = id[3], &lim = id[4];
  SynthCase sc;
  sc.before_text = c + "(" + a + ");\n" +  //
                   t + "(" + x + ");\n";
  sc.after_text = c + "(" + a + ", " + lim + ");\n" +  //
                  t + "(" + x + ", " + lim + ");\n";
  sc.span = line_span(2);
  return sc;
}

SynthCase linq_case(std::mt19937_64& rng, const std::vector<std::string>& pool, int variant) {
  auto id = pick_distinct(rng, pool, 7);
  const std::string &q = id[0], &db = id[1], &pred = id[2], &r = id[3], &proj = id[4],
                    &lim = id[5], &extra = id[6];
  std::string select_before = proj, select_after = proj;
  if (variant == 1) {
    select_before += ", " + extra;
    select_after += ", " + extra;
  }
  SynthCase sc;
  sc.before_text = q + " = " + db + ".where(" + pred + ");\n" +  //
                   r + " = " + q + ".select(" + select_before + ");\n";
  sc.after_text = q + " = " + db + ".where(" + pred + ", " + lim + ");\n" +  //
                  r + " = " + q + ".select(" + select_after + ", " + lim + ");\n";
  sc.span = line_span(2);
  return sc;
}

std::vector<SynthCase> finish(std::vector<SynthCase> cases, Family family, int projects) {
  char buf[64];
  for (size_t i = 0; i < cases.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s-p%d", family_name(family),
                  static_cast<int>(i) % std::max(projects, 1));
    cases[i].project = buf;
    std::snprintf(buf, sizeof buf, "case-%03d", static_cast<int>(i));
    cases[i].name = buf;
  }
  return cases;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::MovArg: return "mov-arg";
    case Family::DelWrap: return "del-wrap";
    case Family::UpdRename: return "upd-rename";
    case Family::InsSubtree: return "ins-subtree";
    case Family::Linq: return "linq";
  }
  return "unknown";
}

const std::vector<std::string>& default_id_pool() {
  static const std::vector<std::string> pool = {
      "alpha", "bravo", "carol", "delta",  "echo",  "fox",    "gamma",   "hotel",
      "india", "julia", "kilo",  "lima",   "mike",  "nora",   "oscar",   "papa",
      "quebec", "romeo", "sierra", "tango", "uncle", "victor", "whiskey", "xray"};
  return pool;
}

const std::vector<std::string>& held_out_id_pool() {
  static const std::vector<std::string> pool = {"yankee", "zulu",  "amber", "birch",
                                                "cedar",  "dune",  "ember", "flint",
                                                "grove",  "haze",  "iris",  "jade"};
  return pool;
}

std::vector<SynthCase> generate_cases(Family family, int count, uint64_t seed, int projects) {
  if (family == Family::Linq) return generate_linq_cases(count, seed, default_id_pool(), projects);
  std::mt19937_64 rng(seed ^ (static_cast<uint64_t>(family) + 1) * 0x9E3779B97F4A7C15ull);
  std::vector<SynthCase> cases;
  cases.reserve(count);
  for (int i = 0; i < count; ++i) {
    switch (family) {
      case Family::MovArg: cases.push_back(mov_arg_case(rng, default_id_pool())); break;
      case Family::DelWrap: cases.push_back(del_wrap_case(rng, default_id_pool())); break;
      case Family::UpdRename: cases.push_back(upd_rename_case(rng, default_id_pool())); break;
      case Family::InsSubtree: cases.push_back(ins_subtree_case(rng, default_id_pool())); break;
      case Family::Linq: break;  // handled above
    }
  }
  return finish(std::move(cases), family, projects);
}

std::vector<SynthCase> generate_linq_cases(int count, uint64_t seed,
                                           const std::vector<std::string>& id_pool,
                                           int projects) {
  std::mt19937_64 rng(seed ^ (static_cast<uint64_t>(Family::Linq) + 1) * 0x9E3779B97F4A7C15ull);
  std::vector<SynthCase> cases;
  cases.reserve(count);
  for (int i = 0; i < count; ++i) cases.push_back(linq_case(rng, id_pool, i % 2));
  return finish(std::move(cases), Family::Linq, projects);
}

void write_corpus(const std::string& dir, const std::vector<SynthCase>& cases) {
  namespace fs = std::filesystem;
  for (const SynthCase& sc : cases) {
    fs::path case_dir = fs::path(dir) / sc.project / sc.name;
    fs::create_directories(case_dir);
    auto write = [&](const char* file, const std::string& text) {
      std::ofstream out(case_dir / file, std::ios::binary);
      if (!out) throw DataError("cannot write " + (case_dir / file).generic_string());
      out << text;
    };
    write("before.toy", sc.before_text);
    write("after.toy", sc.after_text);
    char span[64];
    std::snprintf(span, sizeof span, "%d %d %d %d\n", sc.span.before_first, sc.span.before_last,
                  sc.span.after_first, sc.span.after_last);
    write("span.txt", span);
  }
}

}  // namespace treedit::synth
