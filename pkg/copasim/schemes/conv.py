from .base import Scheme, RefreshReport
from ..buffers import NvbBuffer, AccessOutcome, RefreshSource

DEFAULT_PERIOD_S = 60.0


class ConvScheme(Scheme):
    type = "conv"

    def __init__(self, name, period_s, refresh_source):
        """
        Aggressive refreshing: every journal page is refreshed once per
        period, however recently it was written
        """
        super().__init__(name)
        self.conv_period_s = period_s
        self.refresh_source = refresh_source

    @staticmethod
    def load(scheme_dict):
        period_s = float(scheme_dict.get('period_s', DEFAULT_PERIOD_S))
        source = RefreshSource.from_str(
            scheme_dict.get('refresh_source', "distant"))

        return ConvScheme(scheme_dict.get('name') or f"conv_p{period_s:g}",
                          period_s, source)

    def dump(self):
        return {
            "type": self.type,
            "name": self.name,
            "period_s": self.conv_period_s,
            "refresh_source": self.refresh_source.to_str()
        }

    @staticmethod
    def get_supported_buffers():
        return [NvbBuffer]

    @property
    def period_s(self):
        return self.conv_period_s

    def on_timer(self, now):
        return conv_refresh_tick(self.buffer, now, self.refresh_source)


def conv_refresh_tick(buffer, now, source=RefreshSource.DISTANT):
    outcome = AccessOutcome()
    pages = buffer.journal_pages()

    for page in pages:
        outcome.merge(buffer.refresh_pja_page(page, source))

    return RefreshReport(now, pages, outcome)
