#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sbf {

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide handler for non-fatal warnings and returns the
// previous one. The default handler writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

// Collects warnings for the lifetime of the object, restoring the previous
// handler on destruction.
class ScopedWarningCapture {
 public:
  ScopedWarningCapture();
  ~ScopedWarningCapture();
  ScopedWarningCapture(const ScopedWarningCapture&) = delete;
  ScopedWarningCapture& operator=(const ScopedWarningCapture&) = delete;

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  std::vector<std::string> messages_;
  WarningHandler previous_;
};

}  // namespace sbf
