#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace parkocc::dataset {

struct Finding {
  std::string code;     // e.g. "missing companion label file"
  std::string where;    // table/token or relative path
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> findings;
  std::string digest;  // md5 over every file path and content in the tree
  std::size_t rows_checked = 0;
  std::size_t files_checked = 0;

  bool ok() const { return findings.empty(); }
};

/// Schema and payload checks over a dataset tree. Problems are returned as
/// findings; only an unreadable root throws.
ValidationReport validate_dataset(const std::filesystem::path& root);

/// md5 over the sorted relative paths and contents of every regular file.
std::string tree_digest(const std::filesystem::path& root);

}  // namespace parkocc::dataset
