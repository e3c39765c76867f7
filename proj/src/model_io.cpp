#include "flowpatch/model_io.hpp"

#include <fstream>

#include <json.hpp>

#include "flowpatch/errors.hpp"

namespace flowpatch {

using nlohmann::json;

namespace {

Matrix matrix_from_flat(const std::vector<double>& flat, std::size_t rows,
                        std::size_t cols, const char* what) {
  if (flat.size() != rows * cols)
    throw DataError(std::string(what) + ": expected " +
                    std::to_string(rows * cols) + " entries, got " +
                    std::to_string(flat.size()));
  Matrix m(rows, cols);
  m.data() = flat;
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
}

}  // namespace

std::string hmm_to_json(const hmm::HmmModel& model) {
  json j;
  j["num_states"] = model.num_states;
  j["num_symbols"] = model.num_symbols;
  j["transition"] = model.transition.data();
  j["emission"] = model.emission.data();
  j["initial"] = model.initial;
  return j.dump(2) + "\n";
}

hmm::HmmModel hmm_from_json(const std::string& text) {
  json j = json::parse(text);
  hmm::HmmModel m;
  m.num_states = j.at("num_states").get<int>();
  m.num_symbols = j.at("num_symbols").get<int>();
  auto n = static_cast<std::size_t>(m.num_states);
  auto s = static_cast<std::size_t>(m.num_symbols);
  m.transition = matrix_from_flat(j.at("transition").get<std::vector<double>>(),
                                  n, n, "transition");
  m.emission = matrix_from_flat(j.at("emission").get<std::vector<double>>(), n,
                                s, "emission");
  m.initial = j.at("initial").get<std::vector<double>>();
  m.validate();
  return m;
}

std::string hsmm_to_json(const hsmm::HsmmModel& model) {
  json j;
  j["num_states"] = model.num_states;
  j["num_symbols"] = model.num_symbols;
  j["transition"] = model.transition.data();
  j["emission"] = model.emission.data();
  j["initial"] = model.initial;
  j["sojourn"] = model.sojourn.data();
  j["max_sojourn"] = model.max_sojourn;
  return j.dump(2) + "\n";
}

hsmm::HsmmModel hsmm_from_json(const std::string& text) {
  json j = json::parse(text);
  hsmm::HsmmModel m;
  m.num_states = j.at("num_states").get<int>();
  m.num_symbols = j.at("num_symbols").get<int>();
  m.max_sojourn = j.at("max_sojourn").get<int>();
  auto n = static_cast<std::size_t>(m.num_states);
  auto s = static_cast<std::size_t>(m.num_symbols);
  auto l = static_cast<std::size_t>(m.max_sojourn);
  m.transition = matrix_from_flat(j.at("transition").get<std::vector<double>>(),
                                  n, n, "transition");
  m.emission = matrix_from_flat(j.at("emission").get<std::vector<double>>(), n,
                                s, "emission");
  m.initial = j.at("initial").get<std::vector<double>>();
  m.sojourn = matrix_from_flat(j.at("sojourn").get<std::vector<double>>(), n, l,
                               "sojourn");
  m.validate();
  return m;
}

void save_hmm(const hmm::HmmModel& model, const std::string& path) {
  write_file(path, hmm_to_json(model));
}

hmm::HmmModel load_hmm(const std::string& path) {
  return hmm_from_json(read_file(path));
}

void save_hsmm(const hsmm::HsmmModel& model, const std::string& path) {
  write_file(path, hsmm_to_json(model));
}

hsmm::HsmmModel load_hsmm(const std::string& path) {
  return hsmm_from_json(read_file(path));
}

}  // namespace flowpatch
