#!/usr/bin/python

"""Download dataset files listed in a manifest

Only the `csiaug fetch` command uses this module; every other command
works from files already on disk.
"""

import io
import logging
import os
# cURL rather than urllib so certificates are always checked
import pycurl

from csiaug.dataset import file_digest
from csiaug.errors import FetchError, FormatError

log = logging.getLogger(__name__)


def _status_line(header):
    """Reason phrase of the final response, skipping 100 Continue"""
    lines = [h.decode('iso-8859-1').rstrip('\r\n') for h in header]
    reason = None
    for line in lines:
        tok = line.split(None, 2)
        if tok and tok[0].startswith('HTTP/') and ':' not in tok[0]:
            if len(tok) > 1 and tok[1] == '100':
                continue
            reason = tok[2] if len(tok) > 2 else ''
    return reason


class FetchSession(object):
    """HTTP(S) file transfers against one base URL

    Usage:

    session = csiaug.FetchSession("https://example.org/wallhack1.8k/")
    session.download("W1.8k_LB/0_0000.csis", "data/W1.8k_LB/0_0000.csis")
    """

    def __init__(self, baseurl):
        if not baseurl.endswith('/'):
            baseurl += '/'
        self.baseurl = baseurl
        self.curl_handle = pycurl.Curl()

    def extra_setup(self):
        """A derived class can override this method in order to set
        additional options on the cURL handle just before the transfer
        is performed, such as a proxy server."""

    def get(self, url):
        """Fetch baseurl + url; returns the body as bytes"""
        req = self.curl_handle
        req.setopt(pycurl.URL, self.baseurl + url)
        outbody = io.BytesIO()
        req.setopt(pycurl.WRITEFUNCTION, outbody.write)
        header = []
        req.setopt(pycurl.HEADERFUNCTION, header.append)
        req.setopt(pycurl.SSL_VERIFYPEER, 1)
        req.setopt(pycurl.FOLLOWLOCATION, 1)
        self.extra_setup()
        try:
            req.perform()
        except pycurl.error as e:
            req.reset()
            raise FetchError(self.baseurl + url, 0, str(e))
        code = req.getinfo(pycurl.RESPONSE_CODE)
        req.reset()
        if 200 <= code < 300:
            return outbody.getvalue()
        raise FetchError(self.baseurl + url, code, _status_line(header))

    def download(self, url, dest):
        """Fetch baseurl + url into the file dest

        The file only appears once the whole body has arrived.
        """
        body = self.get(url)
        d = os.path.dirname(dest)
        if d and not os.path.isdir(d):
            os.makedirs(d)
        tmp = dest + '.part'
        with open(tmp, 'wb') as f:
            f.write(body)
        os.replace(tmp, dest)
        return len(body)

    def close(self):
        self.curl_handle.close()


def fetch_manifest_files(manifest, session):
    """Download every file of the manifest that is missing under its root

    Existing files are left alone. Downloaded files are checked against
    their manifest digests. Returns the number of files downloaded.
    """
    count = 0
    for entry in manifest.files:
        dest = manifest.resolve(entry)
        if os.path.exists(dest):
            continue
        session.download(entry.path.replace(os.sep, '/'), dest)
        if entry.digest is not None and file_digest(dest) != entry.digest:
            os.remove(dest)
            raise FormatError(dest, "downloaded file does not match manifest digest")
        count += 1
    log.info("%s: downloaded %d of %d files", manifest.subset, count, len(manifest.files))
    return count
