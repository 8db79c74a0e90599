#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dcpl {

enum class ColumnRole { alternative_attribute, person_covariate };
enum class DataLayout { wide, long_format };

struct SchemaColumn {
  std::string name;
  ColumnRole role = ColumnRole::alternative_attribute;
};

// Column mapping for delimited choice files.
//
// Wide layout (canonical): one row per (person, task) with columns
// `<person_column>`, `<choice_column>`, `<attr>_<j>` for j = 1..J and one
// column per person covariate.
//
// Long layout: J consecutive rows per task, alternatives in order 1..J in
// `<alternative_column>`, plain `<attr>` columns, and the chosen alternative
// repeated on every row of the task.
struct DatasetSchema {
  std::vector<SchemaColumn> columns;
  std::size_t alternatives = 2;
  std::string choice_column = "choice";
  std::string person_column = "id";
  std::string alternative_column = "alt";
  DataLayout layout = DataLayout::wide;

  void validate() const;
  std::vector<std::string> attribute_names() const;
  std::vector<std::string> covariate_names() const;

  static std::string wide_column(const std::string& attribute, std::size_t alternative);
  static DatasetSchema wide(const std::vector<std::string>& attributes,
                            std::size_t alternatives);
};

// Panel of persons x tasks x alternatives. Observations (tasks) are stored
// person-major, so each person's tasks form one contiguous block. Choices are
// held 0-based; files use 1-based alternative indices.
class ChoiceDataset {
 public:
  ChoiceDataset(std::vector<std::string> attribute_names, std::size_t alternatives,
                std::vector<std::string> person_ids,
                std::vector<std::size_t> tasks_per_person,
                std::vector<double> attributes, std::vector<int> choices,
                std::vector<std::string> covariate_names = {},
                std::vector<double> covariates = {});

  std::size_t persons() const noexcept { return person_ids_.size(); }
  std::size_t alternatives() const noexcept { return alternatives_; }
  std::size_t attribute_count() const noexcept { return attribute_names_.size(); }
  std::size_t observations() const noexcept { return choices_.size(); }
  std::size_t tasks(std::size_t person) const { return tasks_[person]; }
  std::size_t first_observation(std::size_t person) const { return offsets_[person]; }

  const std::vector<std::string>& attribute_names() const noexcept { return attribute_names_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  const std::string& person_id(std::size_t person) const { return person_ids_[person]; }
  std::size_t attribute_index(const std::string& name) const;

  double x(std::size_t obs, std::size_t alt, std::size_t attr) const {
    return attributes_[(obs * alternatives_ + alt) * attribute_names_.size() + attr];
  }
  // All J x A attribute values of one observation, alternative-major.
  std::span<const double> observation(std::size_t obs) const {
    const std::size_t width = alternatives_ * attribute_names_.size();
    return {attributes_.data() + obs * width, width};
  }
  int choice(std::size_t obs) const { return choices_[obs]; }
  double covariate(std::size_t obs, std::size_t c) const {
    return covariates_[obs * covariate_names_.size() + c];
  }

  const std::vector<double>& raw_attributes() const noexcept { return attributes_; }
  const std::vector<int>& raw_choices() const noexcept { return choices_; }

  bool operator==(const ChoiceDataset& other) const;

 private:
  std::vector<std::string> attribute_names_;
  std::size_t alternatives_;
  std::vector<std::string> person_ids_;
  std::vector<std::size_t> tasks_;
  std::vector<std::size_t> offsets_;
  std::vector<double> attributes_;
  std::vector<int> choices_;
  std::vector<std::string> covariate_names_;
  std::vector<double> covariates_;
};

ChoiceDataset load_dataset(const std::filesystem::path& path, const DatasetSchema& schema);

// Writes the canonical wide layout with shortest round-trip number formatting,
// so load_dataset(write_dataset(ds)) reproduces every value bit for bit.
void write_dataset(const ChoiceDataset& ds, const std::filesystem::path& path,
                   char delimiter = ',');
DatasetSchema wide_schema_for(const ChoiceDataset& ds);

enum class IssueSeverity { violation, warning };

struct PanelIssue {
  IssueSeverity severity = IssueSeverity::violation;
  std::string category;  // structure | choice | attribute | separation
  std::string message;
};

struct PanelReport {
  std::vector<PanelIssue> issues;

  bool clean() const noexcept { return issues.empty(); }
  std::size_t violations() const noexcept;
  std::size_t warnings() const noexcept;
};

PanelReport validate_panel(const ChoiceDataset& ds);

}  // namespace dcpl
