#include "dcpl/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "dcpl/errors.hpp"

namespace dcpl {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long> parse_integer(std::string_view s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec == std::errc() && ptr == end) return v;
  // Accept integral reals such as "2.0", common in exported choice files.
  if (auto d = parse_double(s); d && std::floor(*d) == *d &&
                                std::abs(*d) < static_cast<double>(std::numeric_limits<long>::max())) {
    return static_cast<long>(*d);
  }
  return std::nullopt;
}

class HeaderIndex {
 public:
  explicit HeaderIndex(const std::vector<std::string_view>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      index_.emplace(std::string(header[i]), i);
    }
  }
  std::size_t require(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) {
      throw DataError(ErrorKind::schema, "missing column '" + name + "'", 1, name);
    }
    return it->second;
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Incremental builder enforcing contiguous person blocks.
class PanelBuilder {
 public:
  PanelBuilder(std::size_t alternatives, std::size_t attributes, std::size_t covariates)
      : alternatives_(alternatives), attributes_(attributes), covariates_(covariates) {}

  void start_task(std::string_view person, std::size_t row) {
    if (person_ids_.empty() || person_ids_.back() != person) {
      if (seen_.count(std::string(person)) != 0) {
        throw DataError(ErrorKind::validation,
                        "person '" + std::string(person) + "' is not contiguous (row " +
                            std::to_string(row) + ")",
                        row);
      }
      seen_.insert(std::string(person));
      person_ids_.emplace_back(person);
      tasks_.push_back(0);
    }
    ++tasks_.back();
  }

  std::vector<double>& attribute_values() { return values_; }
  std::vector<int>& choices() { return choices_; }
  std::vector<double>& covariate_values() { return covariate_values_; }

  ChoiceDataset finish(std::vector<std::string> attribute_names,
                       std::vector<std::string> covariate_names) {
    return ChoiceDataset(std::move(attribute_names), alternatives_, std::move(person_ids_),
                         std::move(tasks_), std::move(values_), std::move(choices_),
                         std::move(covariate_names), std::move(covariate_values_));
  }

  std::size_t alternatives() const { return alternatives_; }
  std::size_t attributes() const { return attributes_; }
  std::size_t covariates() const { return covariates_; }

 private:
  std::size_t alternatives_;
  std::size_t attributes_;
  std::size_t covariates_;
  std::vector<std::string> person_ids_;
  std::unordered_set<std::string> seen_;
  std::vector<std::size_t> tasks_;
  std::vector<double> values_;
  std::vector<int> choices_;
  std::vector<double> covariate_values_;
};

double cell_value(const std::vector<std::string_view>& fields, std::size_t col,
                  const std::string& name, std::size_t row) {
  auto v = parse_double(fields[col]);
  if (!v) {
    throw DataError(ErrorKind::parse,
                    "non-numeric value '" + std::string(fields[col]) + "' in column '" + name +
                        "' at row " + std::to_string(row),
                    row, name);
  }
  return *v;
}

int choice_value(const std::vector<std::string_view>& fields, std::size_t col,
                 const std::string& name, std::size_t alternatives, std::size_t row) {
  auto v = parse_integer(fields[col]);
  if (!v) {
    throw DataError(ErrorKind::parse,
                    "non-integer choice '" + std::string(fields[col]) + "' at row " +
                        std::to_string(row),
                    row, name);
  }
  if (*v < 1 || static_cast<std::size_t>(*v) > alternatives) {
    throw DataError(ErrorKind::validation,
                    "choice " + std::to_string(*v) + " out of range 1.." +
                        std::to_string(alternatives) + " at row " + std::to_string(row),
                    row, name);
  }
  return static_cast<int>(*v - 1);
}

}  // namespace

// ---------------------------------------------------------------- schema

void DatasetSchema::validate() const {
  if (alternatives < 2) {
    throw Error(ErrorKind::schema, "schema needs at least two alternatives");
  }
  if (choice_column.empty() || person_column.empty()) {
    throw Error(ErrorKind::schema, "choice and person columns must be named");
  }
  std::unordered_set<std::string> names{choice_column, person_column};
  if (names.size() != 2) {
    throw Error(ErrorKind::schema, "choice and person columns must differ");
  }
  if (layout == DataLayout::long_format && !names.insert(alternative_column).second) {
    throw Error(ErrorKind::schema, "alternative column collides with another column");
  }
  bool any_attribute = false;
  for (const auto& c : columns) {
    if (!names.insert(c.name).second) {
      throw Error(ErrorKind::schema, "column '" + c.name + "' declared twice");
    }
    any_attribute = any_attribute || c.role == ColumnRole::alternative_attribute;
  }
  if (!any_attribute) {
    throw Error(ErrorKind::schema, "schema declares no alternative attributes");
  }
}

std::vector<std::string> DatasetSchema::attribute_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (c.role == ColumnRole::alternative_attribute) out.push_back(c.name);
  }
  return out;
}

std::vector<std::string> DatasetSchema::covariate_names() const {
  std::vector<std::string> out;
  for (const auto& c : columns) {
    if (c.role == ColumnRole::person_covariate) out.push_back(c.name);
  }
  return out;
}

std::string DatasetSchema::wide_column(const std::string& attribute, std::size_t alternative) {
  return attribute + "_" + std::to_string(alternative);
}

DatasetSchema DatasetSchema::wide(const std::vector<std::string>& attributes,
                                  std::size_t alternatives) {
  DatasetSchema s;
  s.alternatives = alternatives;
  for (const auto& a : attributes) s.columns.push_back({a, ColumnRole::alternative_attribute});
  return s;
}

// ---------------------------------------------------------------- dataset

ChoiceDataset::ChoiceDataset(std::vector<std::string> attribute_names,
                             std::size_t alternatives, std::vector<std::string> person_ids,
                             std::vector<std::size_t> tasks_per_person,
                             std::vector<double> attributes, std::vector<int> choices,
                             std::vector<std::string> covariate_names,
                             std::vector<double> covariates)
    : attribute_names_(std::move(attribute_names)),
      alternatives_(alternatives),
      person_ids_(std::move(person_ids)),
      tasks_(std::move(tasks_per_person)),
      attributes_(std::move(attributes)),
      choices_(std::move(choices)),
      covariate_names_(std::move(covariate_names)),
      covariates_(std::move(covariates)) {
  if (alternatives_ < 2) throw Error(ErrorKind::spec, "dataset needs at least two alternatives");
  if (attribute_names_.empty()) throw Error(ErrorKind::spec, "dataset has no attributes");
  if (person_ids_.size() != tasks_.size()) {
    throw Error(ErrorKind::spec, "person id / task count length mismatch");
  }
  offsets_.resize(tasks_.size());
  std::size_t total = 0;
  for (std::size_t n = 0; n < tasks_.size(); ++n) {
    offsets_[n] = total;
    total += tasks_[n];
  }
  if (choices_.size() != total) {
    throw Error(ErrorKind::spec, "choice count does not match total tasks");
  }
  if (attributes_.size() != total * alternatives_ * attribute_names_.size()) {
    throw Error(ErrorKind::spec, "attribute tensor size mismatch");
  }
  if (covariates_.size() != total * covariate_names_.size()) {
    throw Error(ErrorKind::spec, "covariate table size mismatch");
  }
  for (std::size_t i = 0; i < choices_.size(); ++i) {
    if (choices_[i] < 0 || static_cast<std::size_t>(choices_[i]) >= alternatives_) {
      throw Error(ErrorKind::validation,
                  "choice out of range at observation " + std::to_string(i));
    }
  }
  for (double v : attributes_) {
    if (!std::isfinite(v)) throw Error(ErrorKind::validation, "non-finite attribute value");
  }
}

std::size_t ChoiceDataset::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names_.begin(), attribute_names_.end(), name);
  if (it == attribute_names_.end()) {
    throw Error(ErrorKind::schema, "dataset has no attribute '" + name + "'");
  }
  return static_cast<std::size_t>(it - attribute_names_.begin());
}

bool ChoiceDataset::operator==(const ChoiceDataset& other) const {
  return attribute_names_ == other.attribute_names_ && alternatives_ == other.alternatives_ &&
         person_ids_ == other.person_ids_ && tasks_ == other.tasks_ &&
         attributes_ == other.attributes_ && choices_ == other.choices_ &&
         covariate_names_ == other.covariate_names_ && covariates_ == other.covariates_;
}

// ---------------------------------------------------------------- loading

ChoiceDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema) {
  schema.validate();
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open dataset '" + path.string() + "'");

  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw DataError(ErrorKind::schema, "dataset '" + path.string() + "' has no header row", 1);
  }
  const char delim = header_line.find('\t') != std::string::npos ? '\t' : ',';
  const auto header = split(header_line, delim);
  const HeaderIndex index(header);

  const auto attrs = schema.attribute_names();
  const auto covs = schema.covariate_names();
  const std::size_t J = schema.alternatives;
  const std::size_t A = attrs.size();

  const std::size_t person_col = index.require(schema.person_column);
  const std::size_t choice_col = index.require(schema.choice_column);
  std::vector<std::size_t> cov_cols;
  for (const auto& c : covs) cov_cols.push_back(index.require(c));

  PanelBuilder builder(J, A, covs.size());
  std::string line;
  std::size_t row = 1;

  if (schema.layout == DataLayout::wide) {
    std::vector<std::size_t> attr_cols;  // alternative-major
    std::vector<std::string> attr_col_names;
    for (std::size_t j = 0; j < J; ++j) {
      for (const auto& a : attrs) {
        attr_col_names.push_back(DatasetSchema::wide_column(a, j + 1));
        attr_cols.push_back(index.require(attr_col_names.back()));
      }
    }
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const auto fields = split(line, delim);
      if (fields.size() != header.size()) {
        throw DataError(ErrorKind::parse,
                        "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()),
                        row);
      }
      builder.start_task(fields[person_col], row);
      builder.choices().push_back(
          choice_value(fields, choice_col, schema.choice_column, J, row));
      for (std::size_t k = 0; k < attr_cols.size(); ++k) {
        builder.attribute_values().push_back(
            cell_value(fields, attr_cols[k], attr_col_names[k], row));
      }
      for (std::size_t c = 0; c < cov_cols.size(); ++c) {
        builder.covariate_values().push_back(cell_value(fields, cov_cols[c], covs[c], row));
      }
    }
  } else {
    const std::size_t alt_col = index.require(schema.alternative_column);
    std::vector<std::size_t> attr_cols;
    for (const auto& a : attrs) attr_cols.push_back(index.require(a));

    std::size_t in_task = 0;  // rows consumed of the current task
    std::string task_person;
    int task_choice = -1;
    while (std::getline(in, line)) {
      ++row;
      if (trim(line).empty()) continue;
      const auto fields = split(line, delim);
      if (fields.size() != header.size()) {
        throw DataError(ErrorKind::parse,
                        "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()),
                        row);
      }
      const auto alt = parse_integer(fields[alt_col]);
      if (!alt) {
        throw DataError(ErrorKind::parse, "non-integer alternative index at row " +
                                              std::to_string(row),
                        row, schema.alternative_column);
      }
      if (static_cast<std::size_t>(*alt) != in_task + 1) {
        throw DataError(ErrorKind::validation,
                        "expected alternative " + std::to_string(in_task + 1) + " at row " +
                            std::to_string(row),
                        row, schema.alternative_column);
      }
      const int choice = choice_value(fields, choice_col, schema.choice_column, J, row);
      if (in_task == 0) {
        task_person = std::string(fields[person_col]);
        task_choice = choice;
        builder.start_task(fields[person_col], row);
        builder.choices().push_back(choice);
        for (std::size_t c = 0; c < cov_cols.size(); ++c) {
          builder.covariate_values().push_back(cell_value(fields, cov_cols[c], covs[c], row));
        }
      } else if (fields[person_col] != task_person || choice != task_choice) {
        throw DataError(ErrorKind::validation,
                        "task rows disagree on person or choice at row " + std::to_string(row),
                        row);
      }
      for (std::size_t a = 0; a < A; ++a) {
        builder.attribute_values().push_back(cell_value(fields, attr_cols[a], attrs[a], row));
      }
      in_task = (in_task + 1) % J;
    }
    if (in_task != 0) {
      throw DataError(ErrorKind::validation, "incomplete final task (fewer than " +
                                                 std::to_string(J) + " rows)",
                      row);
    }
  }
  return builder.finish(attrs, covs);
}

DatasetSchema wide_schema_for(const ChoiceDataset& ds) {
  DatasetSchema s = DatasetSchema::wide(ds.attribute_names(), ds.alternatives());
  for (const auto& c : ds.covariate_names()) s.columns.push_back({c, ColumnRole::person_covariate});
  return s;
}

void write_dataset(const ChoiceDataset& ds, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write dataset '" + path.string() + "'");
  const auto schema = wide_schema_for(ds);
  out << schema.person_column << delimiter << schema.choice_column;
  for (std::size_t j = 0; j < ds.alternatives(); ++j) {
    for (const auto& a : ds.attribute_names()) {
      out << delimiter << DatasetSchema::wide_column(a, j + 1);
    }
  }
  for (const auto& c : ds.covariate_names()) out << delimiter << c;
  out << '\n';

  char buf[64];
  auto put = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
  };
  for (std::size_t n = 0; n < ds.persons(); ++n) {
    for (std::size_t t = 0; t < ds.tasks(n); ++t) {
      const std::size_t obs = ds.first_observation(n) + t;
      out << ds.person_id(n) << delimiter << (ds.choice(obs) + 1);
      for (double v : ds.observation(obs)) {
        out << delimiter;
        put(v);
      }
      for (std::size_t c = 0; c < ds.covariate_names().size(); ++c) {
        out << delimiter;
        put(ds.covariate(obs, c));
      }
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::io, "write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------- validation

std::size_t PanelReport::violations() const noexcept {
  return static_cast<std::size_t>(std::count_if(issues.begin(), issues.end(), [](const auto& i) {
    return i.severity == IssueSeverity::violation;
  }));
}

std::size_t PanelReport::warnings() const noexcept { return issues.size() - violations(); }

PanelReport validate_panel(const ChoiceDataset& ds) {
  PanelReport report;
  const std::size_t J = ds.alternatives();
  const std::size_t A = ds.attribute_count();

  for (std::size_t n = 0; n < ds.persons(); ++n) {
    if (ds.tasks(n) == 0) {
      report.issues.push_back({IssueSeverity::violation, "structure",
                               "person '" + ds.person_id(n) + "' has no tasks"});
    }
  }
  for (std::size_t obs = 0; obs < ds.observations(); ++obs) {
    const int y = ds.choice(obs);
    if (y < 0 || static_cast<std::size_t>(y) >= J) {
      report.issues.push_back({IssueSeverity::violation, "choice",
                               "observation " + std::to_string(obs) + " has choice out of range"});
    }
    for (double v : ds.observation(obs)) {
      if (!std::isfinite(v)) {
        report.issues.push_back({IssueSeverity::violation, "attribute",
                                 "observation " + std::to_string(obs) + " has a missing value"});
        break;
      }
    }
  }

  // Single-attribute separation scan: if, on every task where attribute a has
  // a unique extreme, the chosen alternative is that extreme, the likelihood
  // keeps increasing as the coefficient of a runs off to infinity.
  for (std::size_t a = 0; a < A; ++a) {
    for (const bool lowest : {true, false}) {
      std::size_t informative = 0;
      bool separated = true;
      for (std::size_t obs = 0; obs < ds.observations() && separated; ++obs) {
        std::size_t best = 0;
        bool unique = true;
        for (std::size_t j = 1; j < J; ++j) {
          const double v = ds.x(obs, j, a);
          const double b = ds.x(obs, best, a);
          if (v == b) {
            unique = false;
          } else if (lowest ? v < b : v > b) {
            best = j;
            unique = true;
          }
        }
        if (!unique) continue;
        ++informative;
        separated = static_cast<std::size_t>(ds.choice(obs)) == best;
      }
      if (separated && informative > 0) {
        report.issues.push_back(
            {IssueSeverity::warning, "separation",
             "attribute '" + ds.attribute_names()[a] + "' perfectly predicts choice (" +
                 (lowest ? "lowest" : "highest") + " value always chosen on " +
                 std::to_string(informative) + " tasks)"});
      }
    }
  }
  return report;
}

}  // namespace dcpl
