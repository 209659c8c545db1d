#pragma once

#include <string_view>
#include <vector>

namespace cgs::io {

struct GalleryEntry {
  std::string_view name;
  std::string_view text;
};

/// Built-in system files, sorted by name.
const std::vector<GalleryEntry>& gallery_files();

}  // namespace cgs::io
