// Copyright 2026 The specmer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace specmer {

// Base of every error thrown by the library. Subclasses only add a type
// so callers can catch the category they care about.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPECMER_DEFINE_ERROR(Name)     \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

// audio_io
SPECMER_DEFINE_ERROR(FormatError);
SPECMER_DEFINE_ERROR(UnsupportedCodecError);
SPECMER_DEFINE_ERROR(EmptyAudioError);
SPECMER_DEFINE_ERROR(AliasingError);
SPECMER_DEFINE_ERROR(IoError);

// spectrogram
SPECMER_DEFINE_ERROR(SegmentTooShortError);

// nn_core
SPECMER_DEFINE_ERROR(ShapeError);
SPECMER_DEFINE_ERROR(StateError);

// trainer
SPECMER_DEFINE_ERROR(DivergenceError);
SPECMER_DEFINE_ERROR(ConfigError);

// dataset
SPECMER_DEFINE_ERROR(ParseError);
SPECMER_DEFINE_ERROR(RangeError);
SPECMER_DEFINE_ERROR(AnnotationError);

// cv_harness
SPECMER_DEFINE_ERROR(CorpusTooSmallError);

#undef SPECMER_DEFINE_ERROR

}  // namespace specmer
