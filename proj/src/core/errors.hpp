#pragma once

#include <stdexcept>
#include <string>

namespace pcfgthresh {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files: treebanks, grammar files, threshold specs, configs.
class FormatError : public Error {
 public:
  using Error::Error;
};

// The model cannot handle the input: unknown terminal, sentence with no
// parse, inconsistent grammar pairs.
class ModelError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcfgthresh
