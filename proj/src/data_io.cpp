#include "timsrf/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "timsrf/errors.hpp"

namespace timsrf {

namespace {

constexpr std::string_view kLabelPrefix = "label:";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    s = s.substr(1, s.size() - 2);
  return std::string(s);
}

// Splits on `sep` outside single or double quotes.
std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  char quote = 0;
  for (char c : line) {
    if (quote) {
      if (c == quote) quote = 0;
      cur.push_back(c);
    } else if (c == '"' || c == '\'') {
      quote = c;
      cur.push_back(c);
    } else if (c == sep) {
      out.push_back(unquote(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(unquote(cur));
  return out;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string where(const std::filesystem::path& path, std::size_t line, std::size_t column) {
  return path.string() + ": line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

// Maps a {0,1} or {-1,1} label value to +-1; flags zeros for the caller.
int to_sign_label(double v, bool& saw_zero, const std::string& location) {
  if (v == 1.0) return 1;
  if (v == -1.0) return -1;
  if (v == 0.0) {
    saw_zero = true;
    return -1;
  }
  throw ParseError(location + ": label value must be -1, 0 or 1");
}

// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line, ',');
      break;
    }
  }
  if (header.empty()) throw SchemaError(path.string() + ": file is empty");

  {
    double probe = 0.0;
    const bool all_numeric = std::all_of(header.begin(), header.end(), [&](const std::string& h) {
      return parse_double(h, probe);
    });
    if (all_numeric) throw SchemaError(path.string() + ": missing header row");
  }

  Dataset ds;
  ds.name = path.stem().string();
  std::vector<bool> is_label(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c].rfind(kLabelPrefix, 0) == 0) {
      is_label[c] = true;
      ds.label_names.push_back(header[c].substr(kLabelPrefix.size()));
    } else {
      ds.feature_names.push_back(header[c]);
    }
  }
  if (ds.label_names.empty()) throw SchemaError(path.string() + ": no 'label:' columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, ',');
    if (fields.size() != header.size())
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (!parse_double(fields[c], row[c]))
        throw ParseError(where(path, line_no, c + 1) + ": non-numeric cell '" + fields[c] + "'");
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Index>(rows.size());
  ds.features.resize(n, static_cast<Index>(ds.feature_names.size()));
  ds.labels.resize(n, static_cast<Index>(ds.label_names.size()));
  bool saw_zero = false;
  for (Index i = 0; i < n; ++i) {
    Index fj = 0, lj = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(i)][c];
      if (is_label[c])
        ds.labels(i, lj++) = to_sign_label(v, saw_zero, where(path, static_cast<std::size_t>(i) + 2, c + 1));
      else
        ds.features(i, fj++) = v;
    }
  }
  if (saw_zero) std::clog << "notice: " << path.string() << ": mapped 0 labels to -1\n";
  return ds;
}

void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  auto out = open_output(path);
  bool first = true;
  for (const auto& name : dataset.feature_names) {
    out << (first ? "" : ",") << name;
    first = false;
  }
  for (const auto& name : dataset.label_names) {
    out << (first ? "" : ",") << kLabelPrefix << name;
    first = false;
  }
  out << '\n';
  for (Index i = 0; i < dataset.features.rows(); ++i) {
    first = true;
    for (Index j = 0; j < dataset.features.cols(); ++j) {
      out << (first ? "" : ",") << dataset.features(i, j);
      first = false;
    }
    for (Index j = 0; j < dataset.labels.cols(); ++j) {
      out << (first ? "" : ",") << dataset.labels(i, j);
      first = false;
    }
    out << '\n';
  }
}

namespace {

struct ArffAttribute {
  std::string name;
  bool numeric = false;
  bool binary_nominal = false;  // nominal with values exactly {0, 1}
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Reads the next token of an @attribute line: quoted or whitespace-delimited.
std::string next_token(std::string_view& rest) {
  rest = trim(rest);
  if (rest.empty()) return {};
  if (rest.front() == '\'' || rest.front() == '"') {
    const char q = rest.front();
    const auto end = rest.find(q, 1);
    if (end == std::string_view::npos) {
      std::string tok(rest.substr(1));
      rest = {};
      return tok;
    }
    std::string tok(rest.substr(1, end - 1));
    rest.remove_prefix(end + 1);
    return tok;
  }
  const auto end = rest.find_first_of(" \t");
  std::string tok(rest.substr(0, end));
  rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);
  return tok;
}

// MEKA stores the label count in the relation name as "-C k" (k > 0: first k
// attributes, k < 0: last |k|).
std::optional<int> meka_label_option(const std::string& relation) {
  const auto pos = relation.find("-C");
  if (pos == std::string::npos) return std::nullopt;
  std::istringstream in(relation.substr(pos + 2));
  int k = 0;
  if (in >> k && k != 0) return k;
  return std::nullopt;
}

} // namespace

Dataset load_arff(const std::filesystem::path& path, std::optional<int> label_count) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  std::string relation;
  std::vector<ArffAttribute> attrs;
  bool in_data = false;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;

  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '%') continue;
    if (in_data) {
      if (t.front() == '{')
        throw UnsupportedAttribute(path.string() + ": sparse ARFF rows are not supported");
      rows.push_back(split_fields(t, ','));
      row_lines.push_back(line_no);
      continue;
    }
    std::string_view rest = t;
    const std::string keyword = lower(next_token(rest));
    if (keyword == "@relation") {
      relation = unquote(rest);
    } else if (keyword == "@attribute") {
      ArffAttribute a;
      a.name = next_token(rest);
      const auto type_text = std::string(trim(rest));
      const std::string type = lower(type_text);
      if (type == "numeric" || type == "real" || type == "integer") {
        a.numeric = true;
      } else if (!type.empty() && type.front() == '{') {
        const auto close = type.find('}');
        auto values = split_fields(std::string_view(type).substr(1, close - 1), ',');
        std::sort(values.begin(), values.end());
        a.binary_nominal = values == std::vector<std::string>{"0", "1"};
      } else if (type.rfind("string", 0) == 0 || type.rfind("date", 0) == 0 ||
                 type.rfind("relational", 0) == 0) {
        throw UnsupportedAttribute(path.string() + ": line " + std::to_string(line_no) +
                                   ": attribute '" + a.name + "' has unsupported type " +
                                   type_text);
      } else {
        throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                         ": cannot parse attribute type '" + type_text + "'");
      }
      attrs.push_back(std::move(a));
    } else if (keyword == "@end") {
      throw UnsupportedAttribute(path.string() + ": relational attributes are not supported");
    } else if (keyword == "@data") {
      in_data = true;
    } else {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": unexpected header line");
    }
  }
  if (attrs.empty()) throw SchemaError(path.string() + ": no attributes");

  const auto m = attrs.size();
  std::vector<bool> is_label(m, false);
  // An explicit count selects the trailing attributes (Mulan layout); the
  // relation-name option follows its own sign convention.
  std::optional<int> k = label_count ? std::optional<int>(-std::abs(*label_count))
                                     : meka_label_option(relation);
  if (label_count && *label_count == 0) k = 0;
  if (k) {
    const auto count = static_cast<std::size_t>(std::abs(*k));
    if (count == 0 || count > m)
      throw SchemaError(path.string() + ": label count " + std::to_string(std::abs(*k)) +
                        " does not fit " + std::to_string(m) + " attributes");
    for (std::size_t c = 0; c < count; ++c) is_label[*k > 0 ? c : m - 1 - c] = true;
  } else {
    for (std::size_t c = 0; c < m; ++c) is_label[c] = attrs[c].binary_nominal;
  }
  for (std::size_t c = 0; c < m; ++c) {
    if (is_label[c] && !attrs[c].binary_nominal && !attrs[c].numeric)
      throw SchemaError(path.string() + ": label attribute '" + attrs[c].name +
                        "' is not {0,1} nominal");
    if (!is_label[c] && !attrs[c].numeric)
      throw UnsupportedAttribute(path.string() + ": nominal feature '" + attrs[c].name +
                                 "' is not supported");
  }
  if (std::none_of(is_label.begin(), is_label.end(), [](bool b) { return b; }))
    throw SchemaError(path.string() + ": no label attributes");

  Dataset ds;
  ds.name = relation.empty() ? path.stem().string() : relation.substr(0, relation.find(':'));
  for (std::size_t c = 0; c < m; ++c)
    (is_label[c] ? ds.label_names : ds.feature_names).push_back(attrs[c].name);

  const auto n = static_cast<Index>(rows.size());
  ds.features.resize(n, static_cast<Index>(ds.feature_names.size()));
  ds.labels.resize(n, static_cast<Index>(ds.label_names.size()));
  bool saw_zero = false;
  for (Index i = 0; i < n; ++i) {
    const auto& fields = rows[static_cast<std::size_t>(i)];
    const auto ln = row_lines[static_cast<std::size_t>(i)];
    if (fields.size() != m)
      throw ParseError(path.string() + ": line " + std::to_string(ln) + " has " +
                       std::to_string(fields.size()) + " values, expected " + std::to_string(m));
    Index fj = 0, lj = 0;
    for (std::size_t c = 0; c < m; ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v))
        throw ParseError(where(path, ln, c + 1) + ": non-numeric value '" + fields[c] + "'");
      if (is_label[c])
        ds.labels(i, lj++) = to_sign_label(v, saw_zero, where(path, ln, c + 1));
      else
        ds.features(i, fj++) = v;
    }
  }
  (void)saw_zero;  // {0,1} is the native ARFF label encoding
  return ds;
}

Standardization standardize(const Matrix& features, const IndexSet& observed) {
  const Index d = features.cols();
  std::vector<std::vector<double>> by_col(static_cast<std::size_t>(d));
  for (const auto& e : observed) {
    if (e.row < 0 || e.row >= features.rows() || e.col < 0 || e.col >= d)
      throw InvalidArgument("observed position outside feature matrix");
    by_col[static_cast<std::size_t>(e.col)].push_back(features(e.row, e.col));
  }

  Standardization out{features, Vector(d), Vector(d)};
  for (Index j = 0; j < d; ++j) {
    const auto& vals = by_col[static_cast<std::size_t>(j)];
    if (vals.size() < 2)
      throw DegenerateColumn("feature column " + std::to_string(j) + " has " +
                             std::to_string(vals.size()) + " observed entries, need 2");
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double ss = 0.0;
    for (double v : vals) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    const double scale = sd > 0 ? sd : 1.0;
    out.mean(j) = mean;
    out.scale(j) = scale;
    out.features.col(j) = (features.col(j).array() - mean) / scale;
  }
  return out;
}

Matrix destandardize(const Matrix& standardized, const Vector& mean, const Vector& scale) {
  if (mean.size() != standardized.cols() || scale.size() != standardized.cols())
    throw InvalidArgument("transform size does not match column count");
  Matrix out = standardized;
  for (Index j = 0; j < out.cols(); ++j)
    out.col(j) = out.col(j).array() * scale(j) + mean(j);
  return out;
}

void MaskSpec::validate() const {
  if (!(observation_rate > 0 && observation_rate <= 1))
    throw InvalidArgument("observation rate must lie in (0, 1]");
  if (!(block_loss_fraction >= 0 && block_loss_fraction < 1))
    throw InvalidArgument("block loss fraction must lie in [0, 1)");
}

ObservationMasks mcar_mask(Index n, Index d, Index t, const MaskSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  ObservationMasks masks;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j)
      if (unit_uniform(rng) < spec.observation_rate) masks.features.push_back({i, j});
    for (Index j = 0; j < t; ++j)
      if (unit_uniform(rng) < spec.observation_rate) masks.labels.push_back({i, j});
  }
  return masks;
}

BlockLoss block_loss(const IndexSet& observed_labels, Index n, Index t, double fraction,
                     std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) throw InvalidArgument("block fraction must lie in (0, 1)");
  if (n <= 0) throw InvalidArgument("block loss needs at least one row");
  const auto k = static_cast<Index>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  if (k >= n)
    throw EmptyTraining("block of " + std::to_string(k) + " rows leaves no labelled rows out of " +
                        std::to_string(n));

  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  BlockLoss out;
  out.test_rows.assign(order.begin(), order.begin() + k);
  std::sort(out.test_rows.begin(), out.test_rows.end());

  std::vector<bool> dropped(static_cast<std::size_t>(n), false);
  for (Index r : out.test_rows) dropped[static_cast<std::size_t>(r)] = true;
  for (const auto& e : observed_labels) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= t)
      throw InvalidArgument("observed label outside n x t");
    if (!dropped[static_cast<std::size_t>(e.row)]) out.observed_labels.push_back(e);
  }
  return out;
}

SyntheticData synthesize(Index n, Index d, Index t, Index r, double noise_sd,
                         std::uint64_t seed) {
  if (n <= 0 || d <= 0 || t < 0) throw InvalidArgument("synthetic shape must be positive");
  if (r < 1 || r > std::min(n, d)) throw InvalidArgument("rank must lie in [1, min(n, d)]");
  if (!(noise_sd >= 0)) throw InvalidArgument("noise_sd must be nonnegative");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&](Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
  };

  SyntheticModel model;
  model.pre_features = draw(n, r) * draw(r, d);
  do {
    model.weight = draw(t, d);
    model.bias = draw(t, 1).col(0);
    model.soft_labels = (model.pre_features * model.weight.transpose()).rowwise() +
                        model.bias.transpose();
  } while ((model.soft_labels.array() == 0.0).any());

  Dataset ds;
  ds.name = "synthetic";
  ds.features = model.pre_features;
  if (noise_sd > 0) ds.features += noise_sd * draw(n, d);
  ds.labels = model.soft_labels.unaryExpr([](double v) { return v > 0 ? 1 : -1; }).cast<int>();
  for (Index j = 0; j < d; ++j) ds.feature_names.push_back("x" + std::to_string(j));
  for (Index j = 0; j < t; ++j) ds.label_names.push_back("y" + std::to_string(j));
  return {std::move(ds), std::move(model)};
}

void write_masks(const ObservationMasks& masks, const std::filesystem::path& path) {
  auto out = open_output(path);
  for (const auto& e : masks.features) out << "X " << e.row << ' ' << e.col << '\n';
  for (const auto& e : masks.labels) out << "Y " << e.row << ' ' << e.col << '\n';
}

ObservationMasks read_masks(const std::filesystem::path& path) {
  auto in = open_input(path);
  ObservationMasks masks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string zone;
    long long i = -1, j = -1;
    std::string extra;
    if (!(fields >> zone >> i >> j) || (fields >> extra) || i < 0 || j < 0 ||
        (zone != "X" && zone != "Y"))
      throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                       ": expected 'X i j' or 'Y i j'");
    (zone == "X" ? masks.features : masks.labels).push_back({i, j});
  }
  masks.features = canonical(std::move(masks.features));
  masks.labels = canonical(std::move(masks.labels));
  return masks;
}

void write_matrix_csv(const Matrix& m, const std::vector<std::string>& header,
                      const std::filesystem::path& path) {
  auto out = open_output(path);
  if (!header.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
  }
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

} // namespace timsrf
