#include "facdash/authz/mail.hpp"

#include <curl/curl.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <ostream>

#include "facdash/error.hpp"

namespace facdash::authz {

void MemoryMailSink::send(const MailMessage& message) {
  std::lock_guard lock(mutex_);
  messages_.push_back(message);
}

std::vector<MailMessage> MemoryMailSink::messages() const {
  std::lock_guard lock(mutex_);
  return messages_;
}

void MemoryMailSink::clear() {
  std::lock_guard lock(mutex_);
  messages_.clear();
}

void LogMailTransport::send(const MailMessage& message) {
  std::lock_guard lock(mutex_);
  out_ << "[mail] to=" << message.to << " subject=\"" << message.subject << "\"\n"
       << message.body << "\n[/mail]" << std::endl;
}

SmtpMailTransport::SmtpMailTransport(std::string url, std::string from)
    : url_(std::move(url)), from_(std::move(from)) {
  static const bool curl_ready = curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK;
  if (!curl_ready) throw Error(ErrorCode::mail_failure, "libcurl failed to initialise");
}

std::string SmtpMailTransport::render(const MailMessage& message) const {
  std::string body = message.body;
  // SMTP wants CRLF line endings.
  std::string crlf;
  for (char c : body) {
    if (c == '\n') crlf += '\r';
    crlf += c;
  }
  return "To: <" + message.to + ">\r\nFrom: <" + from_ + ">\r\nSubject: " + message.subject +
         "\r\nMIME-Version: 1.0\r\nContent-Type: text/plain; charset=utf-8\r\n\r\n" + crlf +
         "\r\n";
}

namespace {

struct Payload {
  std::string text;
  std::size_t offset = 0;
};

std::size_t read_payload(char* buffer, std::size_t size, std::size_t nitems, void* userdata) {
  auto* p = static_cast<Payload*>(userdata);
  std::size_t n = std::min(size * nitems, p->text.size() - p->offset);
  std::memcpy(buffer, p->text.data() + p->offset, n);
  p->offset += n;
  return n;
}

}  // namespace

void SmtpMailTransport::send(const MailMessage& message) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw Error(ErrorCode::mail_failure, "cannot create SMTP session");

  std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> rcpt(
      curl_slist_append(nullptr, ("<" + message.to + ">").c_str()), curl_slist_free_all);
  Payload payload{render(message)};
  auto from = "<" + from_ + ">";

  curl_easy_setopt(curl.get(), CURLOPT_URL, url_.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_MAIL_FROM, from.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_MAIL_RCPT, rcpt.get());
  curl_easy_setopt(curl.get(), CURLOPT_READFUNCTION, read_payload);
  curl_easy_setopt(curl.get(), CURLOPT_READDATA, &payload);
  curl_easy_setopt(curl.get(), CURLOPT_UPLOAD, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_USE_SSL, static_cast<long>(CURLUSESSL_TRY));
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, 30L);

  if (auto rc = curl_easy_perform(curl.get()); rc != CURLE_OK) {
    throw Error(ErrorCode::mail_failure, std::string("SMTP delivery failed: ") +
                                             curl_easy_strerror(rc));
  }
}

}  // namespace facdash::authz
