#include "smd/ingestion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "smd/errors.hpp"
#include "smd/text.hpp"

namespace smd {

std::vector<int> class_size_targets(int node_count, int label_count) {
  if (node_count < 0 || label_count < 2) throw InputError("bad class size target request");
  const double denom = 0.5 * label_count * (label_count + 1);  // sum of 1..P
  std::vector<int> targets(label_count);
  long long total = 0;
  for (int p = 0; p < label_count; ++p) {
    targets[p] = static_cast<int>(std::lround(node_count * (p + 1) / denom));
    total += targets[p];
  }
  targets[label_count - 1] += static_cast<int>(node_count - total);
  if (targets[label_count - 1] < 0) throw InputError("class size rounding produced a negative target");
  return targets;
}

MRFProblem generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.grid_height <= 0 || cfg.grid_width <= 0) throw InputError("grid dimensions must be positive");
  if (cfg.label_count < 2) throw InputError("label count must be at least 2");

  MRFProblem pb;
  pb.grid_height = cfg.grid_height;
  pb.grid_width = cfg.grid_width;
  pb.node_count = cfg.grid_height * cfg.grid_width;
  pb.label_count = cfg.label_count;
  pb.unary.resize(static_cast<std::size_t>(pb.node_count) * pb.label_count);

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unary_dist(0.0, 1.0);
  std::normal_distribution<double> pair_dist(0.0, std::sqrt(0.5));  // N(0, 0.5) variance

  for (int j = 0; j < pb.node_count; ++j)
    for (int p = 0; p < pb.label_count; ++p) pb.theta(j, p) = unary_dist(rng);

  std::vector<double> row(pb.label_count);
  for (int r = 0; r < cfg.grid_height; ++r) {
    for (int c = 0; c < cfg.grid_width; ++c) {
      const int i = r * cfg.grid_width + c;
      if (c + 1 < cfg.grid_width) {
        std::fill(row.begin(), row.end(), std::abs(pair_dist(rng)));
        pb.add_edge(i, i + 1, row);
      }
      if (r + 1 < cfg.grid_height) {
        std::fill(row.begin(), row.end(), std::abs(pair_dist(rng)));
        pb.add_edge(i, i + cfg.grid_width, row);
      }
    }
  }

  if (cfg.class_sizes) {
    const std::vector<int> targets = class_size_targets(pb.node_count, pb.label_count);
    for (int p = 0; p < pb.label_count; ++p)
      pb.constraints.push_back(strict_class_size(p, targets[p], pb));
  }
  validate(pb);
  return pb;
}

namespace {

constexpr int kHistogramBins = 32;
constexpr double kSeedBigM = 1e6;
constexpr double kSigmaFloor = 1e-3;

// Mean |delta intensity| over 4-neighbor pairs inside the box of the given
// size centered at (row, col), clipped at the borders.
double box_sigma(const Image& img, int row, int col, int box) {
  const int half = box / 2;
  const int r0 = std::max(0, row - half);
  const int r1 = std::min(img.height - 1, r0 + box - 1);
  const int c0 = std::max(0, col - half);
  const int c1 = std::min(img.width - 1, c0 + box - 1);
  double sum = 0.0;
  long long count = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      if (c + 1 <= c1) {
        sum += std::abs(img.intensity(r, c) - img.intensity(r, c + 1));
        ++count;
      }
      if (r + 1 <= r1) {
        sum += std::abs(img.intensity(r, c) - img.intensity(r + 1, c));
        ++count;
      }
    }
  }
  const double sigma = count > 0 ? sum / count : 0.0;
  return std::max(sigma, kSigmaFloor);
}

}  // namespace

MRFProblem problem_from_image(const SegmentationConfig& cfg) {
  const Image& img = cfg.image;
  const Image& seeds = cfg.seeds;
  if (img.width <= 0 || img.height <= 0) throw InputError("empty image");
  if (img.channels != 1 && img.channels != 3) throw InputError("image must have 1 or 3 channels");
  if (seeds.width != img.width || seeds.height != img.height || seeds.channels != 1)
    throw InputError("seed mask must be a 1-channel image of the same size");

  int label_count = 0;
  for (std::uint8_t v : seeds.data) label_count = std::max(label_count, static_cast<int>(v));
  if (label_count < 2) throw InputError("at least 2 seeded classes required");

  // Per-class, per-channel histograms over the seed pixels.
  std::vector<std::vector<long long>> hist(
      label_count, std::vector<long long>(img.channels * kHistogramBins, 0));
  std::vector<long long> seed_pixels(label_count, 0);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const int v = seeds.at(r, c);
      if (v == 0) continue;
      const int p = v - 1;
      ++seed_pixels[p];
      for (int ch = 0; ch < img.channels; ++ch)
        ++hist[p][ch * kHistogramBins + img.at(r, c, ch) / (256 / kHistogramBins)];
    }
  }
  for (int p = 0; p < label_count; ++p)
    if (seed_pixels[p] == 0)
      throw InputError("empty seed for class " + std::to_string(p + 1));

  MRFProblem pb;
  pb.grid_height = img.height;
  pb.grid_width = img.width;
  pb.node_count = img.height * img.width;
  pb.label_count = label_count;
  pb.unary.resize(static_cast<std::size_t>(pb.node_count) * label_count);

  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const int j = r * img.width + c;
      for (int p = 0; p < label_count; ++p) {
        double nll = 0.0;  // -log of the Laplace-smoothed histogram likelihood
        for (int ch = 0; ch < img.channels; ++ch) {
          const long long count =
              hist[p][ch * kHistogramBins + img.at(r, c, ch) / (256 / kHistogramBins)];
          nll -= std::log((count + 1.0) / (seed_pixels[p] + kHistogramBins));
        }
        pb.theta(j, p) = nll;
      }
      const int seed = seeds.at(r, c);
      if (seed > 0) {
        for (int p = 0; p < label_count; ++p)
          if (p != seed - 1) pb.theta(j, p) = kSeedBigM;
      }
    }
  }

  std::vector<double> row(label_count);
  auto potts = [&](int r1, int c1, int r2, int c2) {
    const double di = img.intensity(r1, c1) - img.intensity(r2, c2);
    const double sigma = box_sigma(img, (r1 + r2) / 2, (c1 + c2) / 2, cfg.sigma_box);
    return cfg.a1 + cfg.a2 * std::exp(-di * di / (2.0 * sigma * sigma));
  };
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const int i = r * img.width + c;
      if (c + 1 < img.width) {
        std::fill(row.begin(), row.end(), potts(r, c, r, c + 1));
        pb.add_edge(i, i + 1, row);
      }
      if (r + 1 < img.height) {
        std::fill(row.begin(), row.end(), potts(r, c, r + 1, c));
        pb.add_edge(i, i + img.width, row);
      }
    }
  }

  if (!cfg.star_centers.empty()) {
    if (static_cast<int>(cfg.star_centers.size()) != label_count)
      throw InputError("one star center entry per class expected (-1 to skip)");
    for (int p = 0; p < label_count; ++p) {
      if (cfg.star_centers[p] < 0) continue;
      StarPrior prior;
      prior.label = p;
      prior.center = cfg.star_centers[p];
      prior.beta = cfg.star_beta;
      prior.parent = build_parent_map(img.width, img.height, prior.center);
      pb.star_priors.push_back(std::move(prior));
    }
  }

  if (cfg.equal_class_sizes) {
    std::vector<int> foreground;
    for (int p = 0; p < label_count; ++p)
      if (p != cfg.background_class) foreground.push_back(p);
    for (std::size_t k = 0; k + 1 < foreground.size(); ++k) {
      LinearConstraint lc;
      lc.kind = ConstraintKind::equality;
      lc.rhs = 0.0;
      for (int j = 0; j < pb.node_count; ++j) {
        lc.terms.push_back({j, foreground[k], 1.0});
        lc.terms.push_back({j, foreground[k + 1], -1.0});
      }
      pb.constraints.push_back(std::move(lc));
    }
  }

  validate(pb);
  return pb;
}

namespace {

struct Line {
  int number = 0;
  std::vector<std::string> tokens;
};

double parse_real(const Line& line, const std::string& tok) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected a real number, got '" + tok + "'");
  }
}

long long parse_int(const Line& line, const std::string& tok) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line.number, "expected an integer, got '" + tok + "'");
  }
}

void expect_tokens(const Line& line, std::size_t n) {
  if (line.tokens.size() != n)
    throw ParseError(line.number, "expected " + std::to_string(n) + " fields, got " +
                                      std::to_string(line.tokens.size()));
}

}  // namespace

MRFProblem load_problem(std::istream& is) {
  MRFProblem pb;
  bool header_seen = false;
  bool nodes_seen = false;
  long long declared_edges = -1;
  long long open_terms = 0;  // remaining term lines of the open constraint
  std::vector<std::uint8_t> unary_seen;
  std::set<std::pair<int, int>> edge_set;

  std::string raw;
  int line_number = 0;
  while (std::getline(is, raw)) {
    ++line_number;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.resize(hash);
    Line line;
    line.number = line_number;
    std::istringstream tokens(raw);
    std::string tok;
    while (tokens >> tok) line.tokens.push_back(tok);
    if (line.tokens.empty()) continue;
    const std::string& kw = line.tokens.front();

    if (!header_seen) {
      expect_tokens(line, 2);
      if (kw != "smd" || line.tokens[1] != "1")
        throw ParseError(line.number, "expected header 'smd 1'");
      header_seen = true;
      continue;
    }
    if (open_terms > 0 && kw != "term")
      throw ParseError(line.number, "constraint block is missing term lines");

    if (kw == "grid") {
      expect_tokens(line, 3);
      if (nodes_seen) throw ParseError(line.number, "grid must precede nodes");
      pb.grid_height = static_cast<int>(parse_int(line, line.tokens[1]));
      pb.grid_width = static_cast<int>(parse_int(line, line.tokens[2]));
      if (pb.grid_height <= 0 || pb.grid_width <= 0)
        throw ParseError(line.number, "grid dimensions must be positive");
    } else if (kw == "nodes") {
      expect_tokens(line, 4);
      if (nodes_seen) throw ParseError(line.number, "duplicate nodes line");
      if (line.tokens[2] != "labels") throw ParseError(line.number, "expected 'nodes N labels P'");
      pb.node_count = static_cast<int>(parse_int(line, line.tokens[1]));
      pb.label_count = static_cast<int>(parse_int(line, line.tokens[3]));
      if (pb.node_count < 0 || pb.label_count < 2)
        throw ParseError(line.number, "need N >= 0 and P >= 2");
      pb.unary.assign(static_cast<std::size_t>(pb.node_count) * pb.label_count, 0.0);
      unary_seen.assign(pb.node_count, 0);
      nodes_seen = true;
    } else if (kw == "unary") {
      if (!nodes_seen) throw ParseError(line.number, "unary before nodes");
      expect_tokens(line, 2 + pb.label_count);
      const long long j = parse_int(line, line.tokens[1]);
      if (j < 0 || j >= pb.node_count) throw ParseError(line.number, "node index out of range");
      if (unary_seen[j]) throw ParseError(line.number, "duplicate unary line for node " + std::to_string(j));
      unary_seen[j] = 1;
      for (int p = 0; p < pb.label_count; ++p)
        pb.theta(static_cast<int>(j), p) = parse_real(line, line.tokens[2 + p]);
    } else if (kw == "edges") {
      if (!nodes_seen) throw ParseError(line.number, "edges before nodes");
      expect_tokens(line, 2);
      if (declared_edges >= 0) throw ParseError(line.number, "duplicate edges line");
      declared_edges = parse_int(line, line.tokens[1]);
      if (declared_edges < 0) throw ParseError(line.number, "edge count must be >= 0");
    } else if (kw == "edge") {
      if (declared_edges < 0) throw ParseError(line.number, "edge before edges declaration");
      expect_tokens(line, 3 + pb.label_count);
      int i = static_cast<int>(parse_int(line, line.tokens[1]));
      int j = static_cast<int>(parse_int(line, line.tokens[2]));
      if (i < 0 || i >= pb.node_count || j < 0 || j >= pb.node_count)
        throw ParseError(line.number, "edge endpoint out of range");
      if (i == j) throw ParseError(line.number, "self-loop edge");
      if (i > j) std::swap(i, j);
      if (!edge_set.insert({i, j}).second)
        throw ParseError(line.number, "duplicate edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      if (static_cast<long long>(pb.edges.size()) >= declared_edges)
        throw ParseError(line.number, "more edge lines than declared");
      std::vector<double> c(pb.label_count);
      for (int p = 0; p < pb.label_count; ++p) {
        c[p] = parse_real(line, line.tokens[3 + p]);
        if (!(c[p] >= 0.0)) throw ParseError(line.number, "associative strength must be >= 0");
      }
      pb.edges.push_back({i, j});
      pb.assoc.insert(pb.assoc.end(), c.begin(), c.end());
    } else if (kw == "constraint") {
      if (!nodes_seen) throw ParseError(line.number, "constraint before nodes");
      expect_tokens(line, 4);
      LinearConstraint lc;
      if (line.tokens[1] == "eq")
        lc.kind = ConstraintKind::equality;
      else if (line.tokens[1] == "le")
        lc.kind = ConstraintKind::inequality;
      else
        throw ParseError(line.number, "constraint kind must be 'eq' or 'le'");
      lc.rhs = parse_real(line, line.tokens[2]);
      open_terms = parse_int(line, line.tokens[3]);
      if (open_terms < 0) throw ParseError(line.number, "term count must be >= 0");
      pb.constraints.push_back(std::move(lc));
    } else if (kw == "term") {
      if (open_terms <= 0) throw ParseError(line.number, "term outside a constraint block");
      expect_tokens(line, 4);
      ConstraintTerm t;
      t.node = static_cast<int>(parse_int(line, line.tokens[1]));
      t.label = static_cast<int>(parse_int(line, line.tokens[2]));
      t.weight = parse_real(line, line.tokens[3]);
      if (t.node < 0 || t.node >= pb.node_count || t.label < 0 || t.label >= pb.label_count)
        throw ParseError(line.number, "term index out of range");
      pb.constraints.back().terms.push_back(t);
      --open_terms;
    } else if (kw == "star") {
      if (!nodes_seen) throw ParseError(line.number, "star before nodes");
      if (pb.grid_height <= 0) throw ParseError(line.number, "star requires a grid declaration");
      expect_tokens(line, 4);
      StarPrior prior;
      prior.label = static_cast<int>(parse_int(line, line.tokens[1]));
      prior.center = static_cast<int>(parse_int(line, line.tokens[2]));
      prior.beta = parse_real(line, line.tokens[3]);
      if (prior.label < 0 || prior.label >= pb.label_count)
        throw ParseError(line.number, "star label out of range");
      if (prior.center < 0 || prior.center >= pb.node_count)
        throw ParseError(line.number, "star center out of range");
      if (prior.beta < 0.0) throw ParseError(line.number, "star beta must be >= 0");
      prior.parent = build_parent_map(pb.grid_width, pb.grid_height, prior.center);
      pb.star_priors.push_back(std::move(prior));
    } else {
      throw ParseError(line.number, "unknown keyword '" + kw + "'");
    }
  }

  if (!header_seen) throw ParseError(line_number, "missing 'smd 1' header");
  if (!nodes_seen) throw ParseError(line_number, "missing nodes line");
  if (open_terms > 0) throw ParseError(line_number, "unterminated constraint block");
  for (int j = 0; j < pb.node_count; ++j)
    if (!unary_seen[j])
      throw ParseError(line_number, "missing unary line for node " + std::to_string(j));
  if (declared_edges < 0) declared_edges = 0;
  if (static_cast<long long>(pb.edges.size()) != declared_edges)
    throw ParseError(line_number, "edge count mismatch: declared " + std::to_string(declared_edges) +
                                      ", got " + std::to_string(pb.edges.size()));
  validate(pb);
  return pb;
}

MRFProblem load_problem(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open problem file: " + path);
  return load_problem(is);
}

void save_problem(const MRFProblem& pb, std::ostream& os) {
  validate(pb);
  os << "smd 1\n";
  if (pb.grid_height > 0) os << "grid " << pb.grid_height << ' ' << pb.grid_width << '\n';
  os << "nodes " << pb.node_count << " labels " << pb.label_count << '\n';
  for (int j = 0; j < pb.node_count; ++j) {
    os << "unary " << j;
    for (int p = 0; p < pb.label_count; ++p) os << ' ' << format_double_17(pb.theta(j, p));
    os << '\n';
  }
  os << "edges " << pb.edges.size() << '\n';
  for (std::size_t e = 0; e < pb.edges.size(); ++e) {
    os << "edge " << pb.edges[e].i << ' ' << pb.edges[e].j;
    for (int p = 0; p < pb.label_count; ++p)
      os << ' ' << format_double_17(pb.assoc_at(static_cast<int>(e), p));
    os << '\n';
  }
  for (const LinearConstraint& c : pb.constraints) {
    os << "constraint " << (c.kind == ConstraintKind::equality ? "eq" : "le") << ' '
       << format_double_17(c.rhs) << ' ' << c.terms.size() << '\n';
    for (const ConstraintTerm& t : c.terms)
      os << "term " << t.node << ' ' << t.label << ' ' << format_double_17(t.weight) << '\n';
  }
  for (const StarPrior& prior : pb.star_priors)
    os << "star " << prior.label << ' ' << prior.center << ' ' << format_double_17(prior.beta)
       << '\n';
}

void save_problem(const MRFProblem& pb, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot open problem file for writing: " + path);
  save_problem(pb, os);
  if (!os) throw InputError("failed writing problem file: " + path);
}

}  // namespace smd
