#pragma once

#include <string>

#ifndef PT_DATA_DIR
#error "PT_DATA_DIR must point at the repository's data directory"
#endif

inline std::string test_data(const std::string& relative) { return std::string(PT_DATA_DIR) + "/" + relative; }
