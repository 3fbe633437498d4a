#pragma once

#include "tabsynth/table.hpp"

#include <string>

inline std::string data_path(const std::string& rel) { return std::string(TABSYNTH_DATA_DIR) + "/" + rel; }

inline tabsynth::Table toy_table() { return tabsynth::load_table_file(data_path("toy/finance.json")).front(); }
