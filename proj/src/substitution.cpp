#include "tracelab/substitution.hpp"

#include "tracelab/polynomial.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tracelab {

namespace {

// Splits UTF-8 text into code points; whitespace is skipped.
std::vector<std::string> code_points(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (c >= 0xF0) len = 4;
    else if (c >= 0xE0) len = 3;
    else if (c >= 0xC0) len = 2;
    if (len == 1 && std::isspace(c)) {
      ++i;
      continue;
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

IntMatrix abelianization_of(const std::vector<Word>& images, std::size_t m) {
  IntMatrix mat(m, m, 0);
  for (std::size_t col = 0; col < m; ++col)
    for (char c : images[col]) mat(static_cast<Letter>(c), col) += 1;
  return mat;
}

Eigen::MatrixXd to_eigen(const IntMatrix& m) {
  Eigen::MatrixXd e(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<double>(m(i, j));
  return e;
}

// Positive eigenvector for the Perron value by power iteration on a
// primitive nonnegative matrix.
std::vector<double> perron_vector(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  // Averaging with the identity keeps iteration convergent when the
  // matrix is irreducible but has other eigenvalues on the Perron circle.
  Eigen::MatrixXd shifted = m + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd w = shifted * v;
    w /= w.maxCoeff();
    if ((w - v).lpNorm<Eigen::Infinity>() < 1e-15) {
      v = w;
      break;
    }
    v = w;
  }
  return {v.data(), v.data() + n};
}

RationalVector positive_rational_vector(std::vector<RationalVector> basis) {
  if (basis.size() != 1) throw RuleError("Perron eigenspace is not one-dimensional");
  RationalVector v = std::move(basis.front());
  Rational first = 0;
  for (const auto& x : v)
    if (sgn(x) != 0) {
      first = x;
      break;
    }
  for (auto& x : v) x /= first;
  return v;
}

}  // namespace

SubstitutionRule::SubstitutionRule(std::vector<std::string> glyphs, std::vector<Word> images,
                                   std::optional<RealVector> lengths)
    : glyphs_(std::move(glyphs)), images_(std::move(images)) {
  const std::size_t m = glyphs_.size();
  if (m == 0) throw RuleError("empty alphabet");
  if (m > 255) throw RuleError("alphabet larger than 255 letters");
  if (images_.size() != m) throw RuleError("every letter needs exactly one image");
  for (std::size_t l = 0; l < m; ++l) {
    if (images_[l].empty()) throw RuleError("empty image for letter " + glyphs_[l]);
    for (char c : images_[l])
      if (static_cast<Letter>(c) >= m) throw RuleError("unknown letter in image of " + glyphs_[l]);
  }

  IntMatrix mat = abelianization_of(images_, m);
  Real nu = perron_eigenvalue(mat);

  if (lengths) {
    if (lengths->size() != m) throw RuleError("lengths: expected " + std::to_string(m) + " values");
    for (double v : lengths->approx)
      if (!(v > 0)) throw RuleError("lengths must be positive");
    bool ok = true;
    if (lengths->exact && nu.exact) {
      for (std::size_t col = 0; col < m; ++col) {
        Rational s = 0;
        for (std::size_t row = 0; row < m; ++row) s += (*lengths->exact)[row] * mat(row, col);
        if (s != *nu.exact * (*lengths->exact)[col]) ok = false;
      }
    } else {
      for (std::size_t col = 0; col < m; ++col) {
        double s = 0;
        for (std::size_t row = 0; row < m; ++row) s += lengths->approx[row] * static_cast<double>(mat(row, col));
        double want = nu.approx * lengths->approx[col];
        if (std::fabs(s - want) > 1e-10 * std::fabs(want)) ok = false;
      }
    }
    if (!ok) throw RuleError("lengths are not a left eigenvector for the Perron eigenvalue");
    lengths_ = *lengths;
    if (!nu.exact) lengths_.exact.reset();
    lengths_given_ = true;
    return;
  }

  if (nu.exact) {
    auto basis = nullspace(to_rational(mat.transpose()).shifted(*nu.exact));
    RationalVector theta = positive_rational_vector(std::move(basis));
    Rational smallest = *std::min_element(theta.begin(), theta.end());
    for (auto& t : theta) t /= smallest;
    lengths_ = RealVector::from_exact(theta);
  } else {
    auto theta = perron_vector(to_eigen(mat).transpose());
    double smallest = *std::min_element(theta.begin(), theta.end());
    for (auto& t : theta) t /= smallest;
    lengths_ = RealVector::from_double(std::move(theta));
  }
}

Word SubstitutionRule::encode(std::string_view text) const {
  Word w;
  for (const auto& cp : code_points(text)) w.push_back(static_cast<char>(letter(cp)));
  return w;
}

std::string SubstitutionRule::decode(const Word& word) const {
  std::string s;
  for (char c : word) s += glyphs_.at(static_cast<Letter>(c));
  return s;
}

Letter SubstitutionRule::letter(std::string_view glyph) const {
  for (std::size_t i = 0; i < glyphs_.size(); ++i)
    if (glyphs_[i] == glyph) return static_cast<Letter>(i);
  throw RuleError("unknown letter '" + std::string(glyph) + "'");
}

SubstitutionRule parse_rule(std::string_view text) {
  std::vector<std::string> glyphs;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const std::string& g) {
    auto it = index.find(g);
    if (it != index.end()) return it->second;
    index.emplace(g, glyphs.size());
    glyphs.push_back(g);
    return glyphs.size() - 1;
  };

  struct Production {
    std::size_t lhs;
    std::vector<std::string> rhs;
    int line;
  };
  std::vector<Production> productions;
  std::optional<std::pair<std::vector<std::string>, int>> length_tokens;

  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::stringstream statements(raw);
    std::string statement;
    while (std::getline(statements, statement, ';')) {
      std::string s = trim(statement);
      if (s.empty()) continue;
      if (s.rfind("lengths", 0) == 0) {
        if (length_tokens) throw RuleError("duplicate lengths line", line_no);
        std::istringstream ls(s.substr(7));
        std::vector<std::string> toks;
        for (std::string t; ls >> t;) toks.push_back(t);
        length_tokens = std::make_pair(toks, line_no);
        continue;
      }
      auto arrow = s.find("->");
      if (arrow == std::string::npos) throw RuleError("expected '<letter> -> <word>': " + s, line_no);
      auto lhs = code_points(s.substr(0, arrow));
      if (lhs.size() != 1) throw RuleError("left side must be a single letter: " + s, line_no);
      auto rhs = code_points(s.substr(arrow + 2));
      if (rhs.empty()) throw RuleError("empty image for letter " + lhs[0], line_no);
      std::size_t id = intern(lhs[0]);
      for (const auto& g : rhs) intern(g);
      for (const auto& p : productions)
        if (p.lhs == id) throw RuleError("duplicate rule for letter " + lhs[0], line_no);
      productions.push_back({id, rhs, line_no});
    }
  }
  if (productions.empty()) throw RuleError("no substitution rules found");

  std::vector<Word> images(glyphs.size());
  std::vector<bool> defined(glyphs.size(), false);
  for (const auto& p : productions) {
    defined[p.lhs] = true;
    for (const auto& g : p.rhs) images[p.lhs].push_back(static_cast<char>(index.at(g)));
  }
  for (const auto& p : productions)
    for (const auto& g : p.rhs)
      if (!defined[index.at(g)]) throw RuleError("unknown letter in image: " + g, p.line);

  std::optional<RealVector> lengths;
  if (length_tokens) {
    const auto& [toks, ln] = *length_tokens;
    if (toks.size() != glyphs.size())
      throw RuleError("lengths: expected " + std::to_string(glyphs.size()) + " values", ln);
    RationalVector exact;
    std::vector<double> approx;
    bool all_exact = true;
    for (const auto& t : toks) {
      try {
        Rational q = parse_rational(t);
        exact.push_back(q);
        approx.push_back(q.get_d());
      } catch (const std::exception&) {
        throw RuleError("bad length value '" + t + "'", ln);
      }
    }
    lengths = all_exact ? RealVector::from_exact(exact) : RealVector::from_double(approx);
    try {
      return SubstitutionRule(std::move(glyphs), std::move(images), lengths);
    } catch (const RuleError& e) {
      throw RuleError(e.what(), ln);
    }
  }
  return SubstitutionRule(std::move(glyphs), std::move(images), std::nullopt);
}

SubstitutionRule load_rule_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw RuleError("cannot open rule file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_rule(ss.str());
}

std::string format_rule(const SubstitutionRule& rule) {
  std::string out;
  for (std::size_t l = 0; l < rule.size(); ++l)
    out += rule.glyph(static_cast<Letter>(l)) + " -> " + rule.decode(rule.image(static_cast<Letter>(l))) + "\n";
  if (rule.lengths_given() && rule.lengths().exact) {
    out += "lengths";
    for (const auto& v : *rule.lengths().exact) out += " " + to_string(v);
    out += "\n";
  }
  return out;
}

IntMatrix abelianize(const SubstitutionRule& rule) { return abelianization_of(rule.images(), rule.size()); }

std::vector<long> abelianize_word(const Word& word, std::size_t alphabet_size) {
  std::vector<long> v(alphabet_size, 0);
  for (char c : word) v.at(static_cast<Letter>(c)) += 1;
  return v;
}

Primitivity check_primitive(const IntMatrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::vector<bool>> base(n, std::vector<bool>(n)), cur;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base[i][j] = m(i, j) > 0;
  cur = base;
  const unsigned bound = static_cast<unsigned>((n - 1) * (n - 1) + 1);
  for (unsigned p = 1; p <= bound; ++p) {
    bool positive = true;
    for (std::size_t i = 0; i < n && positive; ++i)
      for (std::size_t j = 0; j < n && positive; ++j) positive = cur[i][j];
    if (positive) return {true, p};
    std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (cur[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (base[k][j]) next[i][j] = true;
    cur = std::move(next);
  }
  return {false, 0};
}

bool check_proper(const SubstitutionRule& rule) {
  const auto& imgs = rule.images();
  for (const auto& w : imgs)
    if (w.front() != imgs.front().front() || w.back() != imgs.front().back()) return false;
  return true;
}

Word substitute_word(const SubstitutionRule& rule, const Word& word) {
  Word out;
  for (char c : word) {
    if (static_cast<Letter>(c) >= rule.size()) throw RuleError("unknown letter in word");
    out += rule.image(static_cast<Letter>(c));
  }
  return out;
}

Word substitute_power(const SubstitutionRule& rule, const Word& word, unsigned power) {
  Word w = word;
  for (unsigned i = 0; i < power; ++i) w = substitute_word(rule, w);
  return w;
}

Seed admissible_seed(const SubstitutionRule& rule, Letter left, Letter right) {
  const std::size_t m = rule.size();
  if (left >= m || right >= m) throw RuleError("seed letter outside the alphabet");
  if (check_proper(rule)) {
    const Letter first = static_cast<Letter>(rule.image(0).front());
    const Letter last = static_cast<Letter>(rule.image(0).back());
    return {left, right, 1, last, first};
  }
  Word pair{static_cast<char>(left), static_cast<char>(right)};
  if (!is_legal(rule, pair)) throw RuleError("seed " + rule.decode(pair) + " is not a legal two-letter word");
  Letter l = left, r = right;
  for (unsigned p = 1; p <= m * m; ++p) {
    l = static_cast<Letter>(rule.image(l).back());
    r = static_cast<Letter>(rule.image(r).front());
    if (l == left && r == right) return {left, right, p, left, right};
  }
  throw RuleError("seed " + rule.decode(pair) + " does not nest under any power <= m^2");
}

namespace {

unsigned depth_for(const SubstitutionRule& rule, Letter anchor, unsigned power, std::size_t letters) {
  // Smallest multiple of power whose image of the anchor has enough letters.
  std::vector<double> sizes(rule.size(), 1.0);
  unsigned depth = 0;
  while (sizes[anchor] < static_cast<double>(letters)) {
    const double before = sizes[anchor];
    for (unsigned i = 0; i < power; ++i) {
      std::vector<double> next(rule.size(), 0.0);
      for (std::size_t x = 0; x < rule.size(); ++x)
        for (char c : rule.image(static_cast<Letter>(x))) next[x] += sizes[static_cast<Letter>(c)];
      sizes = std::move(next);
    }
    depth += power;
    if (sizes[anchor] <= before) throw RuleError("seed anchor does not grow under substitution");
  }
  return depth;
}

}  // namespace

Word limit_right(const SubstitutionRule& rule, const Seed& seed, std::size_t max_letters) {
  unsigned depth = depth_for(rule, seed.right_anchor, seed.power, max_letters);
  return expand_prefix(rule, seed.right_anchor, depth, max_letters);
}

Word limit_left(const SubstitutionRule& rule, const Seed& seed, std::size_t max_letters) {
  unsigned depth = depth_for(rule, seed.left_anchor, seed.power, max_letters);
  return expand_suffix(rule, seed.left_anchor, depth, max_letters);
}

std::string TwoSidedWord::render(const SubstitutionRule& rule) const {
  return rule.decode(left) + "." + rule.decode(right);
}

TwoSidedWord generate_fixed_word(const SubstitutionRule& rule, const Seed& seed, unsigned depth) {
  TwoSidedWord w{Word(1, static_cast<char>(seed.left)), Word(1, static_cast<char>(seed.right))};
  const unsigned steps = seed.power * depth;
  w.left = substitute_power(rule, w.left, steps);
  w.right = substitute_power(rule, w.right, steps);
  return w;
}

namespace {

// Letter counts |sigma^k(l)| for k = 0..depth, saturating at limit.
std::vector<std::vector<std::size_t>> image_sizes(const SubstitutionRule& rule, unsigned depth, std::size_t limit) {
  const std::size_t m = rule.size();
  std::vector<std::vector<std::size_t>> sizes(depth + 1, std::vector<std::size_t>(m, 1));
  for (unsigned k = 1; k <= depth; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      std::size_t s = 0;
      for (char c : rule.image(static_cast<Letter>(l))) s = std::min(limit, s + sizes[k - 1][static_cast<Letter>(c)]);
      sizes[k][l] = s;
    }
  return sizes;
}

void expand_front(const SubstitutionRule& rule, Letter l, unsigned depth, std::size_t want, Word& out,
                  const std::vector<std::vector<std::size_t>>& sizes) {
  if (depth == 0) {
    out.push_back(static_cast<char>(l));
    return;
  }
  for (char c : rule.image(l)) {
    if (out.size() >= want) return;
    expand_front(rule, static_cast<Letter>(c), depth - 1, want, out, sizes);
  }
}

void expand_back(const SubstitutionRule& rule, Letter l, unsigned depth, std::size_t want, Word& out,
                 const std::vector<std::vector<std::size_t>>& sizes) {
  // Builds the suffix in reverse reading order.
  if (depth == 0) {
    out.push_back(static_cast<char>(l));
    return;
  }
  const Word& img = rule.image(l);
  for (auto it = img.rbegin(); it != img.rend(); ++it) {
    if (out.size() >= want) return;
    expand_back(rule, static_cast<Letter>(*it), depth - 1, want, out, sizes);
  }
}

}  // namespace

Word expand_prefix(const SubstitutionRule& rule, Letter letter, unsigned depth, std::size_t max_letters) {
  auto sizes = image_sizes(rule, depth, max_letters + 1);
  Word out;
  out.reserve(std::min(max_letters, sizes[depth][letter]));
  expand_front(rule, letter, depth, max_letters, out, sizes);
  if (out.size() > max_letters) out.resize(max_letters);
  return out;
}

Word expand_suffix(const SubstitutionRule& rule, Letter letter, unsigned depth, std::size_t max_letters) {
  auto sizes = image_sizes(rule, depth, max_letters + 1);
  Word out;
  out.reserve(std::min(max_letters, sizes[depth][letter]));
  expand_back(rule, letter, depth, max_letters, out, sizes);
  if (out.size() > max_letters) out.resize(max_letters);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Word> legal_words(const SubstitutionRule& rule, std::size_t length) {
  if (length == 0) return {Word()};
  std::set<Word> found;
  auto harvest = [&](const Word& w, std::set<Word>& into) {
    for (std::size_t i = 0; i + length <= w.size(); ++i) into.insert(w.substr(i, length));
  };
  // Seeds: factors of sigma^n(L) once the images are long enough.
  for (std::size_t l = 0; l < rule.size(); ++l) {
    Word w(1, static_cast<char>(l));
    for (int guard = 0; w.size() < 4 * length + 4 && guard < 64; ++guard) {
      Word next = substitute_word(rule, w);
      if (next.size() == w.size() && next == w) break;
      w = std::move(next);
    }
    harvest(w, found);
  }
  // Closure: every legal word sits inside sigma(v) for some legal v of the
  // same length.
  std::vector<Word> frontier(found.begin(), found.end());
  while (!frontier.empty()) {
    std::set<Word> fresh;
    for (const auto& w : frontier) {
      std::set<Word> local;
      harvest(substitute_word(rule, w), local);
      for (const auto& f : local)
        if (!found.count(f)) fresh.insert(f);
    }
    for (const auto& f : fresh) found.insert(f);
    frontier.assign(fresh.begin(), fresh.end());
  }
  return {found.begin(), found.end()};
}

bool is_legal(const SubstitutionRule& rule, const Word& word) {
  auto words = legal_words(rule, word.size());
  return std::binary_search(words.begin(), words.end(), word);
}

Real perron_eigenvalue(const IntMatrix& m) {
  Eigen::MatrixXd e = to_eigen(m);
  auto v = perron_vector(e);
  Eigen::Map<Eigen::VectorXd> vec(v.data(), static_cast<Eigen::Index>(v.size()));
  Eigen::VectorXd mv = e * vec;
  double nu = mv.sum() / vec.sum();
  auto poly = characteristic_polynomial(to_rational(m));
  long candidate = std::lround(nu);
  if (std::fabs(nu - static_cast<double>(candidate)) < 1e-6 && sgn(evaluate(poly, Rational(candidate))) == 0)
    return Real::from_exact(Rational(candidate));
  return Real::from_double(nu);
}

RealVector perron_right_vector(const IntMatrix& m, const Real& nu, const RealVector& weights) {
  if (nu.exact && weights.exact) {
    RationalVector f = positive_rational_vector(nullspace(to_rational(m).shifted(*nu.exact)));
    Rational norm = dot(f, *weights.exact);
    for (auto& x : f) x /= norm;
    return RealVector::from_exact(f);
  }
  auto f = perron_vector(to_eigen(m));
  double norm = 0;
  for (std::size_t i = 0; i < f.size(); ++i) norm += f[i] * weights.approx[i];
  for (auto& x : f) x /= norm;
  return RealVector::from_double(std::move(f));
}

PerronData perron_data(const SubstitutionRule& rule) {
  IntMatrix mat = abelianize(rule);
  if (!check_primitive(mat).primitive) throw RuleError("substitution matrix is not primitive");
  PerronData d;
  d.expansion = perron_eigenvalue(mat);
  d.lengths = rule.lengths();
  d.frequencies = perron_right_vector(mat, d.expansion, d.lengths);
  if (d.frequencies.exact) {
    Rational density = 0;
    for (const auto& x : *d.frequencies.exact) density += x;
    d.density = Real::from_exact(density);
  } else {
    double density = 0;
    for (double x : d.frequencies.approx) density += x;
    d.density = Real::from_double(density);
  }
  return d;
}

bool looks_periodic(const SubstitutionRule& rule) {
  constexpr std::size_t kCap = 1 << 16;
  const Letter start = static_cast<Letter>(rule.image(0).front());
  Word w = expand_prefix(rule, start, 8, kCap);
  const std::size_t n = w.size();
  // Smallest period via the prefix function.
  std::vector<std::size_t> pi(n, 0);
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t k = pi[i - 1];
    while (k > 0 && w[i] != w[k]) k = pi[k - 1];
    if (w[i] == w[k]) ++k;
    pi[i] = k;
  }
  std::size_t period = n - (n ? pi[n - 1] : 0);
  return period <= n / 2;
}

}  // namespace tracelab
