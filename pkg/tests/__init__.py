"""
GLC Actors テストパッケージ
"""
