#pragma once

#include <string>
#include <vector>

namespace umf::fixture {

inline std::vector<std::string> bundled_scenarios() {
  const std::string dir = std::string(UMF_SOURCE_DIR) + "/scenarios/";
  return {dir + "la1.json",  dir + "la2a.json",        dir + "la2b.json",   dir + "la3.json",
          dir + "la4.json",  dir + "la4_detach.json",  dir + "gateway.json"};
}

}  // namespace umf::fixture
