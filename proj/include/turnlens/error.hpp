// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace turnlens {

enum class ErrorKind {
  MalformedTranscript,
  MissingMetadata,
  InvalidTerm,
  InvalidName,
  InvalidEdit,
  UnknownModel,
  DuplicateName,
  DuplicateTerm,
  UnknownTerm,
  InvalidWeight,
  InvalidArgument,
  BackgroundUnavailable,
  EmptyCorpus,
  OutOfVocabulary,
  StaleAssignments,
  EmptySubject,
  UnknownRespondent,
  InsufficientData,
  ZeroVariance,
  KeyMismatch,
  IoFailure,
  ReplayDivergence,
  PortUnavailable,
  NotFound,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedTranscript: return "MalformedTranscript";
    case ErrorKind::MissingMetadata: return "MissingMetadata";
    case ErrorKind::InvalidTerm: return "InvalidTerm";
    case ErrorKind::InvalidName: return "InvalidName";
    case ErrorKind::InvalidEdit: return "InvalidEdit";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::DuplicateName: return "DuplicateName";
    case ErrorKind::DuplicateTerm: return "DuplicateTerm";
    case ErrorKind::UnknownTerm: return "UnknownTerm";
    case ErrorKind::InvalidWeight: return "InvalidWeight";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::BackgroundUnavailable: return "BackgroundUnavailable";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::OutOfVocabulary: return "OutOfVocabulary";
    case ErrorKind::StaleAssignments: return "StaleAssignments";
    case ErrorKind::EmptySubject: return "EmptySubject";
    case ErrorKind::UnknownRespondent: return "UnknownRespondent";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::KeyMismatch: return "KeyMismatch";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::ReplayDivergence: return "ReplayDivergence";
    case ErrorKind::PortUnavailable: return "PortUnavailable";
    case ErrorKind::NotFound: return "NotFound";
  }
  return "Unknown";
}

/// Every failure raised by the engine. The kind is stable and is what the
/// CLI and HTTP layers report; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace turnlens
