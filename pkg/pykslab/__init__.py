__version__ = '0.2.0'
__release__ = 'v0.2.0-alpha'
