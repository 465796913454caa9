#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "semmask/error.hpp"

namespace semmask::cli {

namespace fs = std::filesystem;

// Output directory for one run: held under an exclusive lock file, with
// every artifact registered so a failed run leaves nothing half-written.
class RunDir {
 public:
  explicit RunDir(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    created_ = !fs::exists(root_);
    fs::create_directories(root_, ec);
    require(!ec, Errc::io, "cannot create output directory " + root_.string() + ": " + ec.message());
    lock_ = root_ / ".lock";
    std::FILE* f = std::fopen(lock_.c_str(), "wx");
    require(f != nullptr, Errc::io, "output directory " + root_.string() + " is locked by another run (" + lock_.string() + ")");
    std::fclose(f);
  }

  RunDir(const RunDir&) = delete;
  RunDir& operator=(const RunDir&) = delete;

  ~RunDir() {
    std::error_code ec;
    if (!committed_) {
      for (auto it = artifacts_.rbegin(); it != artifacts_.rend(); ++it) fs::remove_all(*it, ec);
    }
    fs::remove(lock_, ec);
    if (!committed_ && created_ && fs::is_empty(root_, ec)) fs::remove(root_, ec);
  }

  const fs::path& root() const { return root_; }

  // Registers an artifact (file or directory) and returns its path.
  fs::path artifact(const std::string& name) {
    fs::path p = root_ / name;
    artifacts_.push_back(p);
    return p;
  }

  void commit() { committed_ = true; }

 private:
  fs::path root_, lock_;
  std::vector<fs::path> artifacts_;
  bool created_ = false;
  bool committed_ = false;
};

}  // namespace semmask::cli
