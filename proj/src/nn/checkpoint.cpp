#include "veli/nn/checkpoint.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>

#include "veli/error.hpp"

namespace veli::nn {

void Checkpoint::set(const std::string& key, std::string value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  metadata.emplace_back(key, std::move(value));
}

std::optional<std::string> Checkpoint::get(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return std::nullopt;
}

const std::string& Checkpoint::require(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  throw DataError("checkpoint is missing metadata key '" + key + "'");
}

const DenseNet& Checkpoint::net(const std::string& name) const {
  for (const auto& [n, net] : nets)
    if (n == name) return net;
  throw DataError("checkpoint has no network named '" + name + "'");
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_exact(const std::string& token) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    throw DataError("malformed real '" + token + "' in checkpoint");
  return v;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << "veli-checkpoint " << Checkpoint::kFormatVersion << '\n';
  for (const auto& [k, v] : ckpt.metadata) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos)
      throw ConfigError("checkpoint metadata key/value must be single-line, key without spaces: " + k);
    out << "meta " << k << ' ' << v << '\n';
  }
  for (const auto& [name, net] : ckpt.nets) {
    out << "net " << name << ' ' << net.layer_count() << '\n';
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
      const auto& l = net.layer(k);
      out << "layer " << l.in << ' ' << l.out << ' ' << to_string(l.activation) << '\n';
      const auto w = net.weights(k);
      for (std::size_t o = 0; o < l.out; ++o) {
        out << 'w';
        for (std::size_t i = 0; i < l.in; ++i) out << ' ' << format_exact(w[o * l.in + i]);
        out << '\n';
      }
      out << 'b';
      for (double b : net.bias(k)) out << ' ' << format_exact(b);
      out << '\n';
    }
  }
  out << "end\n";
}

namespace {

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> words;
  for (std::string w; ss >> w;) words.push_back(w);
  return words;
}

std::size_t parse_count(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw DataError(std::string("malformed ") + what + " '" + s + "' in checkpoint");
  }
}

}  // namespace

Checkpoint read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty checkpoint");
  {
    const auto head = split_words(line);
    if (head.size() != 2 || head[0] != "veli-checkpoint")
      throw DataError("not a veli checkpoint (bad header)");
    if (head[1] != std::to_string(Checkpoint::kFormatVersion))
      throw DataError("unsupported checkpoint version " + head[1]);
  }
  Checkpoint ckpt;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == "end") {
      ended = true;
      break;
    }
    if (line.rfind("meta ", 0) == 0) {
      const auto rest = line.substr(5);
      const auto space = rest.find(' ');
      if (space == std::string::npos) ckpt.metadata.emplace_back(rest, "");
      else ckpt.metadata.emplace_back(rest.substr(0, space), rest.substr(space + 1));
      continue;
    }
    const auto words = split_words(line);
    if (words.size() != 3 || words[0] != "net") throw DataError("unexpected checkpoint line: " + line);
    const std::string name = words[1];
    const std::size_t layer_count = parse_count(words[2], "layer count");
    std::vector<LayerShape> shapes;
    std::vector<std::vector<double>> weights, biases;
    for (std::size_t k = 0; k < layer_count; ++k) {
      if (!std::getline(in, line)) throw DataError("truncated checkpoint in net " + name);
      const auto lw = split_words(line);
      if (lw.size() != 4 || lw[0] != "layer") throw DataError("expected layer record, got: " + line);
      LayerShape shape{parse_count(lw[1], "layer width"), parse_count(lw[2], "layer width"),
                       activation_from_string(lw[3])};
      std::vector<double> w;
      w.reserve(shape.in * shape.out);
      for (std::size_t o = 0; o < shape.out; ++o) {
        if (!std::getline(in, line)) throw DataError("truncated weights in net " + name);
        const auto row = split_words(line);
        if (row.size() != shape.in + 1 || row[0] != "w")
          throw DataError("bad weight row in net " + name);
        for (std::size_t i = 1; i < row.size(); ++i) w.push_back(parse_exact(row[i]));
      }
      if (!std::getline(in, line)) throw DataError("truncated bias in net " + name);
      const auto brow = split_words(line);
      if (brow.size() != shape.out + 1 || brow[0] != "b") throw DataError("bad bias row in net " + name);
      std::vector<double> b;
      for (std::size_t i = 1; i < brow.size(); ++i) b.push_back(parse_exact(brow[i]));
      shapes.push_back(shape);
      weights.push_back(std::move(w));
      biases.push_back(std::move(b));
    }
    DenseNet net(shapes);
    for (std::size_t k = 0; k < layer_count; ++k) {
      std::copy(weights[k].begin(), weights[k].end(), net.weights(k).begin());
      std::copy(biases[k].begin(), biases[k].end(), net.bias(k).begin());
    }
    ckpt.nets.emplace_back(name, std::move(net));
  }
  if (!ended) throw DataError("checkpoint truncated (missing 'end')");
  return ckpt;
}

}  // namespace veli::nn
