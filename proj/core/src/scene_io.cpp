#include "cosseg/scene_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <system_error>

#include "cosseg/errors.hpp"

namespace cosseg {
namespace {

constexpr std::string_view kSceneMagic = "SPC1";

// Whitespace tokenizer over one line.
class Tokens {
 public:
  explicit Tokens(std::string_view line) : rest_(line) {}

  bool next(std::string_view& token) {
    const auto begin = rest_.find_first_not_of(" \t\r");
    if (begin == std::string_view::npos) return false;
    rest_.remove_prefix(begin);
    const auto end = rest_.find_first_of(" \t\r");
    token = rest_.substr(0, end);
    rest_.remove_prefix(end == std::string_view::npos ? rest_.size() : end);
    return true;
  }

 private:
  std::string_view rest_;
};

template <typename T>
bool parse_number(std::string_view token, T& value) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last;
}

std::string where(std::size_t line_no) { return "line " + std::to_string(line_no) + ": "; }

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_scene(std::ostream& os, const Scene& scene) {
  const auto& c = scene.cloud;
  c.validate();
  scene.labels.validate(scene.n_categories);
  if (scene.labels.size() != c.size()) throw ShapeError("labels and point cloud differ in size");

  os << kSceneMagic << ' ' << c.size() << ' ' << c.feature_dim() << ' ' << scene.n_categories << '\n';
  for (Index i = 0; i < c.coords.rows(); ++i) {
    for (Index a = 0; a < 3; ++a) os << format_real(c.coords(i, a)) << ' ';
    for (Index a = 0; a < 3; ++a) os << format_real(c.colors(i, a)) << ' ';
    for (Index f = 0; f < c.feature_dim(); ++f) os << format_real(c.features(i, f)) << ' ';
    const auto row = static_cast<std::size_t>(i);
    os << scene.labels.semantic[row] << ' ' << scene.labels.instance[row] << '\n';
  }
}

Scene read_scene(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw HeaderError("empty scene file");

  Tokens header(line);
  std::string_view tok;
  long long n_points = 0;
  long long d_f = 0;
  int n_categories = 0;
  if (!header.next(tok) || tok != kSceneMagic) throw HeaderError("scene header must start with SPC1");
  if (!header.next(tok) || !parse_number(tok, n_points) || n_points < 1)
    throw HeaderError("scene header: bad point count");
  if (!header.next(tok) || !parse_number(tok, d_f) || d_f < 0)
    throw HeaderError("scene header: bad feature dimension");
  if (!header.next(tok) || !parse_number(tok, n_categories) || n_categories < 1)
    throw HeaderError("scene header: bad category count");
  if (header.next(tok)) throw HeaderError("scene header: trailing tokens");

  Scene scene;
  scene.n_categories = n_categories;
  auto& c = scene.cloud;
  c.coords.resize(n_points, 3);
  c.colors.resize(n_points, 3);
  c.features.resize(n_points, d_f);
  scene.labels.semantic.resize(static_cast<std::size_t>(n_points));
  scene.labels.instance.resize(static_cast<std::size_t>(n_points));

  for (Index i = 0; i < n_points; ++i) {
    const std::size_t line_no = static_cast<std::size_t>(i) + 2;
    if (!std::getline(is, line)) throw FormatError(where(line_no) + "unexpected end of file");
    Tokens t(line);
    auto real = [&](double& v) {
      if (!t.next(tok) || !parse_number(tok, v)) throw FormatError(where(line_no) + "expected a real number");
    };
    auto integer = [&](int& v) {
      if (!t.next(tok) || !parse_number(tok, v)) throw FormatError(where(line_no) + "expected an integer");
    };
    for (Index a = 0; a < 3; ++a) real(c.coords(i, a));
    for (Index a = 0; a < 3; ++a) real(c.colors(i, a));
    for (Index f = 0; f < d_f; ++f) real(c.features(i, f));
    integer(scene.labels.semantic[static_cast<std::size_t>(i)]);
    integer(scene.labels.instance[static_cast<std::size_t>(i)]);
    if (t.next(tok)) throw FormatError(where(line_no) + "too many fields");
  }
  while (std::getline(is, line)) {
    Tokens t(line);
    if (t.next(tok)) throw FormatError("more point rows than the header declares");
  }

  try {
    c.validate();
    scene.labels.validate(n_categories);
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid scene data: ") + e.what());
  }
  return scene;
}

void write_labels(std::ostream& os, const SceneLabels& labels) {
  if (labels.semantic.size() != labels.instance.size()) throw ShapeError("label vectors differ in length");
  for (std::size_t i = 0; i < labels.size(); ++i) os << labels.semantic[i] << ' ' << labels.instance[i] << '\n';
}

SceneLabels read_labels(std::istream& is) {
  SceneLabels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    Tokens t(line);
    std::string_view tok;
    if (!t.next(tok)) continue;
    int sem = 0;
    int inst = 0;
    if (!parse_number(tok, sem)) throw FormatError(where(line_no) + "expected semantic id");
    if (!t.next(tok) || !parse_number(tok, inst)) throw FormatError(where(line_no) + "expected instance id");
    if (t.next(tok)) throw FormatError(where(line_no) + "too many fields");
    if (sem < 0 || inst < kNoise) throw FormatError(where(line_no) + "label out of range");
    labels.semantic.push_back(sem);
    labels.instance.push_back(inst);
  }
  if (labels.size() == 0) throw FormatError("label file is empty");
  return labels;
}

void save_scene(const std::filesystem::path& path, const Scene& scene) {
  auto out = open_out(path);
  write_scene(out, scene);
  if (!out) throw FormatError("failed writing " + path.string());
}

Scene load_scene(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_scene(in);
}

void save_labels(const std::filesystem::path& path, const SceneLabels& labels) {
  auto out = open_out(path);
  write_labels(out, labels);
  if (!out) throw FormatError("failed writing " + path.string());
}

SceneLabels load_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string first;
  in >> first;
  in.clear();
  in.seekg(0);
  if (first == kSceneMagic) return read_scene(in).labels;
  return read_labels(in);
}

}  // namespace cosseg
