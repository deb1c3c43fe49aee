#pragma once

#include <stdexcept>
#include <string>

namespace msde {

struct PointOutsideChart : std::runtime_error {
  explicit PointOutsideChart(const std::string& what) : std::runtime_error(what) {}
};

struct NotInOverlap : std::runtime_error {
  explicit NotInOverlap(const std::string& what) : std::runtime_error(what) {}
};

struct DegeneratePlane : std::runtime_error {
  explicit DegeneratePlane(const std::string& what) : std::runtime_error(what) {}
};

struct FrameBlowup : std::runtime_error {
  explicit FrameBlowup(const std::string& what) : std::runtime_error(what) {}
};

struct LeftAtlas : std::runtime_error {
  explicit LeftAtlas(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msde
