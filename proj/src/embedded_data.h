#pragma once

#include <string_view>

namespace molblocks::embedded {

std::string_view brics_rules();
std::string_view names();
std::string_view demo_vocab();

}  // namespace molblocks::embedded
