#!/usr/bin/python

"""Exception hierarchy shared by every csiaug module.

Each class carries the attributes a caller needs to report the failure
(file, line, offending fields...) and an exit_code used by the command
line front end. Codes are grouped by failure class:

- 2: input logs could not be parsed
- 3: a spectrogram file is malformed
- 4: the run configuration is invalid
- 5: anything that went wrong while running
"""

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_FORMAT = 3
EXIT_SCHEMA = 4
EXIT_RUNTIME = 5


class CsiAugError(Exception):
    exit_code = EXIT_RUNTIME


class ParseError(CsiAugError):
    """A numeric field in a CSI log line could not be decoded"""
    exit_code = EXIT_PARSE

    def __init__(self, path, lineno, message):
        if path is None and lineno is None:
            where = ''
        elif lineno is None:
            where = '%s: ' % (path,)
        else:
            where = '%s:%d: ' % (path if path is not None else '<line>', lineno)
        CsiAugError.__init__(self, where + message)
        self.path = path
        self.lineno = lineno
        self.message = message

    def located(self, path, lineno):
        """Return a copy of this error attributed to path:lineno"""
        return type(self)(path, lineno, self.message)


class StructuralError(ParseError):
    """A CSI log line does not have the expected shape

    Missing columns, odd-length I/Q arrays and arrays with fewer
    pairs than the subcarrier selection needs all end up here.
    """


class FormatError(CsiAugError):
    exit_code = EXIT_FORMAT

    def __init__(self, path, message):
        CsiAugError.__init__(self, '%s: %s' % (path, message))
        self.path = path
        self.message = message


class SchemaError(CsiAugError):
    """Configuration did not validate

    :param fields: list of (dotted field name, problem) pairs. All
      problems found are reported at once.
    """
    exit_code = EXIT_SCHEMA

    def __init__(self, fields):
        fields = list(fields)
        CsiAugError.__init__(self, 'invalid configuration: ' + '; '.join(
            '%s: %s' % (name, problem) for name, problem in fields
        ))
        self.fields = fields

    @property
    def field_names(self):
        return [name for name, _ in self.fields]


class BoundsError(CsiAugError, ValueError):
    """An index or range falls outside the data it addresses"""


class ParameterError(CsiAugError, ValueError):
    """An augmentation operator was given an invalid parameter"""


class SplitError(CsiAugError, ValueError):
    pass


class SamplerError(CsiAugError, ValueError):
    pass


class RunFailed(CsiAugError):
    """A training run diverged (non-finite loss)"""

    def __init__(self, arm, run_index, cause):
        CsiAugError.__init__(
            self, 'arm %r run %d failed: %s' % (arm, run_index, cause)
        )
        self.arm = arm
        self.run_index = run_index
        self.cause = cause


class FetchError(CsiAugError):
    """HTTP transfer failed while fetching dataset files"""

    def __init__(self, url, code, message):
        if message:
            CsiAugError.__init__(self, "%s: %d %s" % (url, code, message))
        else:
            CsiAugError.__init__(self, "%s: %d" % (url, code))
        self.url = url
        self.code = code
        self.message = message
